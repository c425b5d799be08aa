import numpy as np
import pytest

from ccrmodel.data import GroupedDataset, center_within_group, phi_tilde
from ccrmodel.estimator import CcrConfig, fit
from ccrmodel.linalg import is_orthonormal, subspace_distance
from ccrmodel.multigroup import (
    UseBinaryPathError,
    build_stacked_phi,
    fit_multigroup,
    group_score_correlations,
    pair_order,
    stack_pairwise,
)
from oracles import brute_force_stacked_support, pearson


def _groups(seed, k=3, n=20, p1=5, p2=4):
    rng = np.random.default_rng(seed)
    return [(rng.normal(size=(n, p1)), rng.normal(size=(n, p2))) for _ in range(k)]


def test_pair_order():
    assert pair_order([1, 2, 3]) == [(1, 2), (2, 3), (3, 1)]
    assert pair_order("abcd") == [("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")]


def test_binary_dataset_is_redirected():
    with pytest.raises(UseBinaryPathError):
        build_stacked_phi(GroupedDataset.from_groups(_groups(0, k=2)))


def test_stack_shapes_and_copy_block():
    blocks = _groups(1, n=10, p1=18, p2=15)
    blocks[2] = blocks[1]
    sp = build_stacked_phi(GroupedDataset.from_groups(blocks))
    assert sp.horizontal.shape == (18, 45) and sp.vertical.shape == (54, 15)
    np.testing.assert_array_equal(sp.pairwise[1].phi, 0.0)


def test_blocks_match_pairwise_phi_tilde():
    x = [np.array([[1.0, 0.0], [2.0, 1.0]]), np.array([[0.0, 3.0], [1.0, 1.0]]), np.array([[2.0, 2.0], [0.0, 1.0]])]
    y = [np.array([[1.0, 2.0], [0.0, 1.0]]), np.array([[4.0, 0.0], [1.0, 1.0]]), np.array([[1.0, 1.0], [3.0, 0.0]])]
    d = GroupedDataset.from_groups(list(zip(x, y)))
    sp = build_stacked_phi(d)
    c = center_within_group(d)
    for block, (a, b) in zip(sp.pairwise, [(1, 2), (2, 3), (3, 1)]):
        np.testing.assert_array_equal(block.phi, phi_tilde(c, a, b).phi)
    np.testing.assert_array_equal(sp.horizontal[:, 2:4], sp.pairwise[1].phi)
    np.testing.assert_array_equal(sp.vertical[4:6], sp.pairwise[2].phi)


def test_four_groups_use_all_pairs():
    sp = build_stacked_phi(GroupedDataset.from_groups(_groups(2, k=4)))
    assert sp.blocks == 6 and sp.horizontal.shape == (5, 24)


def test_identical_groups_are_degenerate():
    g = _groups(3, k=1)[0]
    res = fit_multigroup(build_stacked_phi(GroupedDataset.from_groups([g, g, g])), CcrConfig(1, 2, 2))
    assert not res.converged and res.degenerate
    np.testing.assert_array_equal(res.deltas, [0.0])


def test_support_matches_brute_force():
    rng = np.random.default_rng(4)
    for trial in range(5):
        u = np.zeros(4)
        u[rng.choice(4, 2, replace=False)] = rng.uniform(1, 3, 2)
        v = np.zeros(4)
        v[rng.choice(4, 2, replace=False)] = rng.uniform(1, 3, 2)
        base = np.outer(u, v)
        blocks = [base * c for c in rng.uniform(-2, 2, 3)]
        res = fit_multigroup(stack_pairwise(blocks), CcrConfig(1, 2, 2))
        rows, cols, val = brute_force_stacked_support(blocks, 2, 2)
        assert res.selected_x.tolist() == list(rows) and res.selected_y.tolist() == list(cols)
        assert res.deltas[0] ** 2 == pytest.approx(val, rel=1e-8)


def test_two_identical_groups_reduce_to_binary_fit():
    a, b = _groups(6, k=2, n=30, p1=6, p2=5)
    d3 = GroupedDataset.from_groups([a, b, b])
    d2 = center_within_group(GroupedDataset.from_groups([a, b]))
    cfg = CcrConfig(1, 3, 2)
    multi = fit_multigroup(build_stacked_phi(d3), cfg)
    binary = fit(phi_tilde(d2), cfg)
    assert multi.selected_x.tolist() == binary.selected_x.tolist()
    assert subspace_distance(multi.u_hat, binary.u_hat) <= 1e-6
    assert subspace_distance(multi.v_hat, binary.v_hat) <= 1e-6
    # noiseless rank one
    u, v = np.r_[2.0, 1.0, 0, 0, 0], np.r_[0, 1.0, 3.0, 0]
    phi = np.outer(u, v)
    m = fit_multigroup(stack_pairwise([phi, np.zeros_like(phi), -phi]), CcrConfig(1, 2, 2))
    bfit = fit(phi, CcrConfig(1, 2, 2))
    assert subspace_distance(m.u_hat, bfit.u_hat) <= 1e-6 and subspace_distance(m.v_hat, bfit.v_hat) <= 1e-6


def test_relabeling_groups_keeps_support_and_delta():
    g = _groups(7, n=40, p1=6, p2=5)
    cfg = CcrConfig(1, 3, 3)
    a = fit_multigroup(build_stacked_phi(GroupedDataset.from_groups(g)), cfg)
    b = fit_multigroup(build_stacked_phi(GroupedDataset.from_groups([g[2], g[0], g[1]])), cfg)
    assert a.selected_x.tolist() == b.selected_x.tolist() and a.selected_y.tolist() == b.selected_y.tolist()
    np.testing.assert_allclose(a.deltas, b.deltas, rtol=1e-10)


def test_fit_invariants_rank_two():
    sp = build_stacked_phi(GroupedDataset.from_groups(_groups(8, n=25, p1=7, p2=6)))
    res = fit_multigroup(sp, CcrConfig(2, 4, 3))
    assert is_orthonormal(res.u_hat) and is_orthonormal(res.v_hat)
    assert np.count_nonzero(np.any(res.u_hat != 0, axis=1)) == 4
    assert np.all(np.diff(res.deltas) <= 1e-12)


def test_group_score_correlations():
    t = np.linspace(-1, 1, 7)
    rng = np.random.default_rng(9)
    groups = [(np.c_[t, rng.normal(size=7)], np.c_[3 * t + 1, rng.normal(size=7)])]
    groups += [(rng.normal(size=(7, 2)), rng.normal(size=(7, 2))) for _ in range(2)]
    d = GroupedDataset.from_groups(groups)
    res = fit_multigroup(build_stacked_phi(d), CcrConfig(1, 1, 1))
    res.u_hat[:] = [[1.0], [0.0]]
    res.v_hat[:] = [[1.0], [0.0]]
    rho = group_score_correlations(res, d)
    assert rho[1] == pytest.approx(1.0, abs=1e-12)
    c = center_within_group(d)
    for g in (2, 3):
        xg, yg = c.group_block(g)
        assert rho[g] == pytest.approx(pearson(xg[:, 0], yg[:, 0]), abs=1e-12)
