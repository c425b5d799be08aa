import math
import warnings

import numpy as np
import pytest

from ccrmodel.data import GroupedDataset, center_within_group, phi_tilde
from ccrmodel.errors import ValidationError
from ccrmodel.estimator import CcrConfig, fit
from ccrmodel.selection import (
    SpssConfig,
    exact_sign_flip_pvalue,
    ic_surface,
    ic_value,
    lto_delta_samples,
    lto_phis,
    sign_flip_pvalue,
    spss_select,
)
from oracles import enumerate_sign_flip, ic_closed_form, pipeline_phi


def _random_binary(seed, n1, n2, p1, p2, signal=0.0):
    rng = np.random.default_rng(seed)
    x1, x2 = rng.normal(size=(n1, p1)), rng.normal(size=(n2, p1))
    y1 = rng.normal(size=(n1, p2)) + signal * x1[:, :1]
    y2 = rng.normal(size=(n2, p2)) - signal * x2[:, :1]
    return GroupedDataset.from_groups([(x1, y1), (x2, y2)])


def test_lto_toy_against_independent_pipeline():
    d = _random_binary(0, 3, 3, 4, 3, signal=1.0)
    vals = lto_delta_samples(d, 2, 2)
    assert vals.shape == (9,)
    x1, y1 = d.group_block(1)
    x2, y2 = d.group_block(2)
    for i, j in [(0, 2), (2, 1)]:
        keep1 = [k for k in range(3) if k != i]
        keep2 = [k for k in range(3) if k != j]
        phi = pipeline_phi(x1[keep1], y1[keep1], x2[keep2], y2[keep2])
        expected = fit(phi, CcrConfig(1, 2, 2)).deltas[0]
        assert vals[3 * i + j] == pytest.approx(expected, abs=1e-8)


def test_lto_phis_match_direct_recentering():
    d = _random_binary(1, 4, 5, 3, 2)
    phis = lto_phis(d)
    x1, y1 = d.group_block(1)
    x2, y2 = d.group_block(2)
    for i in range(4):
        for j in range(5):
            k1 = np.delete(np.arange(4), i)
            k2 = np.delete(np.arange(5), j)
            np.testing.assert_allclose(phis[5 * i + j], pipeline_phi(x1[k1], y1[k1], x2[k2], y2[k2]), atol=1e-12)


def test_lto_duplicated_groups():
    rng = np.random.default_rng(2)
    x, y = rng.normal(size=(5, 4)), rng.normal(size=(5, 3))
    d = GroupedDataset.from_groups([(x, y), (x, y)])
    # dropping the same row from both copies leaves a zero difference, which
    # has no direction to estimate: those splits are excluded as missing
    with pytest.warns(RuntimeWarning, match="5 of 25"):
        vals = lto_delta_samples(d, 2, 2).reshape(5, 5)
    assert np.all(np.isnan(np.diag(vals)))
    off = ~np.eye(5, dtype=bool)
    np.testing.assert_allclose(vals[off], vals.T[off], atol=1e-12)


def test_lto_split_count_application_shape():
    d = _random_binary(3, 10, 11, 3, 3)
    assert lto_phis(d).shape == (110, 3, 3)


def test_lto_requires_three_per_group():
    with pytest.raises(ValidationError):
        lto_phis(_random_binary(4, 2, 5, 3, 3))


def test_sign_flip_all_zero():
    assert sign_flip_pvalue(np.zeros(6), 1000, 0) == 1.0


def test_sign_flip_constant_vector():
    p = sign_flip_pvalue([1, 1, 1, 1], 100_000, 0, add_one=False)
    assert abs(p - 1 / 16) <= 0.01
    assert enumerate_sign_flip([1, 1, 1, 1]) == 1 / 16


def test_sign_flip_small_vector_against_enumeration():
    d = [2.0, -1.0, 0.5]
    exact = enumerate_sign_flip(d)
    assert exact == exact_sign_flip_pvalue(d)
    assert abs(sign_flip_pvalue(d, 100_000, 1) - exact) <= 0.02


def test_sign_flip_order_invariance_and_monotonicity():
    rng = np.random.default_rng(3)
    d = rng.normal(0.2, 1.0, size=30)
    p = sign_flip_pvalue(d, 5000, 11)
    assert sign_flip_pvalue(rng.permutation(d), 5000, 11) == p
    assert sign_flip_pvalue(d + 0.3, 5000, 11) <= p


def test_sign_flip_parallel_matches_serial_and_seed_matters():
    d = np.random.default_rng(4).normal(0.1, 1.0, size=25)
    serial = sign_flip_pvalue(d, 10_000, (5, 1, 2))
    assert sign_flip_pvalue(d, 10_000, (5, 1, 2), n_jobs=3) == serial
    assert 0.0 < serial <= 1.0


def test_sign_flip_ignores_nan_and_rejects_empty():
    assert sign_flip_pvalue([1.0, np.nan, 1.0], 1000, 0) == sign_flip_pvalue([1.0, 1.0], 1000, 0)
    with pytest.raises(ValidationError):
        sign_flip_pvalue([np.nan], 1000, 0)


def test_spss_config_validation():
    with pytest.raises(ValidationError):
        SpssConfig(permutations=999)
    with pytest.raises(ValidationError):
        SpssConfig(alpha=1.5)
    with pytest.raises(ValidationError):
        SpssConfig(statistic="mean")


def _quiet_select(d, cfg, r=1):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return spss_select(d, r, cfg)


def test_spss_alpha_boundaries():
    d = _random_binary(5, 4, 4, 4, 3, signal=1.0)
    # every p-value is at most 1, so each test passes and both sweeps run to the end
    assert _quiet_select(d, SpssConfig(1000, alpha=1.0)).selected == (3, 2)
    # add-one p-values are positive, so nothing passes at level 0
    assert _quiet_select(d, SpssConfig(1000, alpha=0.0)).selected == (1, 1)


def test_spss_boundary_warning():
    d = _random_binary(6, 4, 4, 3, 3, signal=1.0)
    with pytest.warns(RuntimeWarning, match="boundary"):
        spss_select(d, 1, SpssConfig(1000, alpha=1.0))


def test_spss_result_grid_and_tidy_rows():
    d = _random_binary(7, 5, 5, 4, 4, signal=2.0)
    res = _quiet_select(d, SpssConfig(1000))
    assert res.lto_split_count == 25
    assert res.pvalues_s1.shape == (3, 4) and res.pvalues_s2.shape == (3, 4)
    finite = np.concatenate([res.pvalues_s1[np.isfinite(res.pvalues_s1)], res.pvalues_s2[np.isfinite(res.pvalues_s2)]])
    assert finite.size and np.all((finite > 0) & (finite <= 1))
    rows = res.tidy()
    assert len(rows) == finite.size
    assert {"sweep", "step", "fixed", "p_value"} <= set(rows[0])
    assert 1 <= res.selected[0] <= 3 and 1 <= res.selected[1] <= 3


def test_spss_null_design_with_jackknife_statistic_stops_at_one():
    rng = np.random.default_rng(1)
    x, y = rng.normal(size=(8, 5)), rng.normal(size=(8, 4))
    d = GroupedDataset.from_groups([(x, y), (x, y)])
    assert _quiet_select(d, SpssConfig(1000, statistic="jackknife")).selected == (1, 1)


def test_spss_deterministic():
    d = _random_binary(8, 4, 5, 4, 3, signal=1.5)
    a = _quiet_select(d, SpssConfig(1000, seed=3))
    b = _quiet_select(d, SpssConfig(1000, seed=3))
    assert a.selected == b.selected
    np.testing.assert_array_equal(a.pvalues_s1, b.pvalues_s1)


def test_ic_value_closed_form():
    phi = np.zeros((5, 4))
    phi[0, 0] = 10.0
    res = fit(phi, CcrConfig(1, 1, 1))
    norm = float(np.linalg.norm(res.phi_hat))
    assert norm == pytest.approx(10.0, abs=1e-12)
    assert ic_value(norm, 1, 1, 40) == pytest.approx(ic_closed_form(10.0, 1, 1, 40), abs=1e-10)
    assert ic_value(0.0, 1, 1, 40) == math.inf


def _single_signal_dataset():
    # only x1/y1 covary and only in group 1, so every cell keeps the same norm
    t = np.array([-2.0, -1.0, 1.0, 2.0])
    zeros = np.zeros((4, 2))
    x1, y1 = np.c_[t, zeros], np.c_[t, zeros]
    x2, y2 = np.zeros((4, 3)), np.zeros((4, 3))
    return GroupedDataset.from_groups([(x1, y1), (x2, y2)])


def test_ic_penalty_arithmetic():
    d = _single_signal_dataset()
    surf = ic_surface(d)
    base = surf.values[0, 0]
    for i in range(3):
        for j in range(3):
            assert surf.values[i, j] - base == pytest.approx((i + j) * math.log(8), abs=1e-10)
    assert surf.argmin == (1, 1) and surf.n == 8


def test_ic_infeasible_and_zero_cells_are_inf():
    d = _random_binary(9, 6, 6, 4, 4, signal=1.0)
    surf = ic_surface(d, r=2)
    assert np.all(np.isinf(surf.values[0, :])) and np.all(np.isinf(surf.values[:, 0]))
    assert np.all(np.isfinite(surf.values[1:, 1:]))
    i, j = surf.argmin
    assert surf.values[i - 1, j - 1] == surf.values.min()
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=(4, 3)), rng.normal(size=(4, 2))
    null = ic_surface(GroupedDataset.from_groups([(x, y), (x, y)]))
    assert np.all(np.isinf(null.values))


def test_ic_deterministic_and_recovers_strong_signal():
    d = _random_binary(10, 40, 40, 6, 5, signal=3.0)
    a, b = ic_surface(d), ic_surface(d)
    np.testing.assert_array_equal(a.values, b.values)
    # the signal couples x1 with every y column
    assert a.argmin == (1, 5)
