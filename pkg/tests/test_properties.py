import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ccrmodel.data import GroupedDataset, center_within_group, phi_tilde
from ccrmodel.estimator import CcrConfig, fit
from ccrmodel.linalg import is_orthonormal, projector, qr_orthonormalize, subspace_distance, truncated_svd
from ccrmodel.selection import sign_flip_pvalue

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@st.composite
def matrices(draw, max_side=7):
    rows = draw(st.integers(1, max_side))
    cols = draw(st.integers(1, max_side))
    return draw(arrays(float, (rows, cols), elements=finite))


@given(matrices())
def test_singular_values_sorted_and_nonnegative(m):
    r = min(m.shape)
    _, s, _ = truncated_svd(m, r)
    assert np.all(s >= 0) and np.all(np.diff(s) <= 1e-12 * max(1.0, s[0]))


@given(matrices())
def test_full_rank_projectors_preserve_matrix(m):
    r = min(m.shape)
    left, _, right = truncated_svd(m, r)
    assert np.linalg.norm(projector(left) @ m @ projector(right) - m) <= 1e-8 * max(np.linalg.norm(m), 1e-300)


@given(st.integers(2, 8).flatmap(lambda p: st.tuples(st.just(p), st.integers(1, p))), st.integers(0, 10_000))
def test_subspace_distance_symmetric_and_rotation_invariant(pr, seed):
    p, r = pr
    rng = np.random.default_rng(seed)
    a = qr_orthonormalize(rng.normal(size=(p, r)))
    b = qr_orthonormalize(rng.normal(size=(p, r)))
    rot = np.linalg.qr(rng.normal(size=(r, r)))[0]
    d = subspace_distance(a, b)
    assert 0.0 <= d <= 1.0
    assert abs(d - subspace_distance(b, a)) <= 1e-12
    assert abs(d - subspace_distance(a @ rot, b)) <= 1e-10
    assert subspace_distance(a, a @ rot) <= 1e-7


@given(st.integers(1, 8).flatmap(lambda p: st.tuples(st.just(p), st.integers(1, p))), st.integers(0, 10_000))
def test_qr_reorthonormalization_is_stable(pr, seed):
    p, r = pr
    q = qr_orthonormalize(np.random.default_rng(seed).normal(size=(p, r)))
    assert is_orthonormal(q)
    assert np.abs(projector(qr_orthonormalize(q)) - projector(q)).max() <= 1e-10


@settings(max_examples=60)
@given(st.integers(0, 2**31), st.integers(2, 9), st.integers(2, 9), st.data())
def test_fit_invariants(seed, p1, p2, data):
    phi = np.random.default_rng(seed).normal(size=(p1, p2))
    s1 = data.draw(st.integers(1, p1))
    s2 = data.draw(st.integers(1, p2))
    r = data.draw(st.integers(1, min(s1, s2)))
    res = fit(phi, CcrConfig(r, s1, s2))
    assert is_orthonormal(res.u_hat) and is_orthonormal(res.v_hat)
    assert len(res.selected_x) == s1 and len(res.selected_y) == s2
    assert not np.delete(res.u_hat, res.selected_x, axis=0).any()
    assert not np.delete(res.v_hat, res.selected_y, axis=0).any()
    if res.converged:
        assert np.all(res.deltas >= 0) and np.all(np.diff(res.deltas) <= 1e-10)
        assert np.allclose(res.phi_hat, res.p_u @ phi @ res.p_v, atol=1e-10)
    else:
        assert res.message


@settings(max_examples=30)
@given(arrays(float, st.integers(1, 40), elements=st.floats(-10, 10)), st.integers(0, 1000))
def test_pvalue_order_invariant(d, seed):
    p = sign_flip_pvalue(d, 1000, seed)
    assert 0.0 < p <= 1.0
    assert sign_flip_pvalue(d[::-1], 1000, seed) == p


@settings(max_examples=30)
@given(st.integers(0, 2**31), st.integers(2, 6), st.integers(2, 6))
def test_phi_tilde_antisymmetric(seed, n1, n2):
    rng = np.random.default_rng(seed)
    d = center_within_group(GroupedDataset.from_groups([(rng.normal(size=(n1, 3)), rng.normal(size=(n1, 2))),
                                                        (rng.normal(size=(n2, 3)), rng.normal(size=(n2, 2)))]))
    np.testing.assert_array_equal(phi_tilde(d, 1, 2).phi, -phi_tilde(d, 2, 1).phi)
