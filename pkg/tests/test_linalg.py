import numpy as np
import pytest

from ccrmodel.errors import DegenerateBasisError, DimensionError, NotPSDError, ValidationError
from ccrmodel.linalg import (
    is_orthonormal,
    projector,
    psd_sqrt,
    qr_orthonormalize,
    sign_normalize,
    subspace_distance,
    truncated_svd,
)
from ccrmodel.simulation import correlation_block
from oracles import gram_singular_values, hand_projector, normal_equation_projector


def test_svd_diagonal():
    left, s, right = truncated_svd(np.diag([3.0, 1.0]), 2)
    np.testing.assert_allclose(s, [3.0, 1.0])
    np.testing.assert_allclose(projector(left[:, :1]), np.diag([1.0, 0.0]), atol=1e-14)
    np.testing.assert_allclose(np.abs(left), np.eye(2), atol=1e-14)
    np.testing.assert_allclose(np.abs(right), np.eye(2), atol=1e-14)


def test_svd_rank_one_outer_product():
    rng = np.random.default_rng(3)
    u = rng.normal(size=5)
    u /= np.linalg.norm(u)
    v = rng.normal(size=4)
    v /= np.linalg.norm(v)
    left, s, right = truncated_svd(np.outer(u, v), 1)
    assert s[0] == pytest.approx(1.0, abs=1e-12)
    assert subspace_distance(left, u[:, None]) < 1e-10
    assert subspace_distance(right, v[:, None]) < 1e-10


def test_svd_against_gram_eigenvalues():
    m = np.random.default_rng(0).normal(size=(5, 4))
    left, s, right = truncated_svd(m, 4)
    np.testing.assert_allclose(left @ np.diag(s) @ right.T, m, atol=1e-10 * np.linalg.norm(m))
    np.testing.assert_allclose(s, gram_singular_values(m), rtol=1e-10)
    assert is_orthonormal(left) and is_orthonormal(right)


@pytest.mark.parametrize("r", [0, 5])
def test_svd_rank_out_of_range(r):
    with pytest.raises(DimensionError):
        truncated_svd(np.ones((4, 3)), r)


def test_svd_rejects_non_finite():
    with pytest.raises(ValidationError):
        truncated_svd(np.array([[1.0, np.nan], [0.0, 1.0]]), 1)


def test_sign_convention_largest_entry_positive():
    m = np.random.default_rng(1).normal(size=(6, 5))
    left, _, right = truncated_svd(m, 3)
    for j in range(3):
        assert left[np.argmax(np.abs(left[:, j])), j] > 0
    # the pair still reconstructs the rank-3 part
    u, s, vt = np.linalg.svd(m)
    np.testing.assert_allclose(left @ np.diag(s[:3]) @ right.T, u[:, :3] @ np.diag(s[:3]) @ vt[:3], atol=1e-12)


def test_sign_normalize_flips_pairs_together():
    a = np.array([[-2.0], [1.0]])
    b = np.array([[1.0], [1.0]])
    a2, b2 = sign_normalize(a, b)
    np.testing.assert_array_equal(a2, -a)
    np.testing.assert_array_equal(b2, -b)


def test_qr_identity_input():
    q0 = np.linalg.qr(np.random.default_rng(2).normal(size=(6, 3)))[0]
    assert np.abs(projector(qr_orthonormalize(q0)) - projector(q0)).max() <= 1e-10


def test_qr_axis_aligned():
    q = qr_orthonormalize(np.array([[2.0, 0.0], [0.0, 3.0], [0.0, 0.0]]))
    np.testing.assert_allclose(projector(q), np.diag([1.0, 1.0, 0.0]), atol=1e-14)


def test_qr_against_normal_equations():
    m = np.random.default_rng(4).normal(size=(6, 2))
    q = qr_orthonormalize(m)
    assert np.linalg.norm(projector(q) - normal_equation_projector(m)) <= 1e-8
    assert is_orthonormal(q)


def test_qr_idempotent():
    q = qr_orthonormalize(np.random.default_rng(5).normal(size=(7, 3)))
    assert np.abs(projector(qr_orthonormalize(q)) - projector(q)).max() <= 1e-10


@pytest.mark.parametrize("m", [np.zeros((4, 1)), np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]), np.ones((1, 2))])
def test_qr_degenerate(m):
    with pytest.raises(DegenerateBasisError):
        qr_orthonormalize(m)


def test_subspace_distance_examples():
    e = np.eye(3)
    assert subspace_distance(e[:, :1], e[:, :1]) == 0.0
    assert subspace_distance(e[:, :1], e[:, 1:2]) == pytest.approx(1.0, abs=1e-15)
    b = np.array([[1.0], [1.0], [0.0]]) / np.sqrt(2.0)
    expected = np.linalg.norm(hand_projector([1, 0, 0]) - hand_projector([1, 1, 0])) / np.sqrt(2.0)
    assert subspace_distance(e[:, :1], b) == pytest.approx(expected, abs=1e-14)
    assert expected == pytest.approx(np.sqrt(2.0) / 2.0)


def test_subspace_distance_shape_mismatch():
    with pytest.raises(DimensionError):
        subspace_distance(np.eye(3)[:, :1], np.eye(3)[:, :2])


def test_psd_sqrt_examples():
    np.testing.assert_allclose(psd_sqrt(np.eye(3)), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)
    ar = correlation_block("ar", 0.7, 3)
    s = psd_sqrt(ar)
    assert np.linalg.norm(s @ s - ar) <= 1e-8 * np.linalg.norm(ar)
    np.testing.assert_array_equal(s, s.T)


def test_psd_sqrt_clips_round_off_and_rejects_indefinite():
    near = np.diag([1.0, -1e-12])
    np.testing.assert_allclose(psd_sqrt(near), np.diag([1.0, 0.0]), atol=1e-15)
    with pytest.raises(NotPSDError):
        psd_sqrt(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ValidationError):
        psd_sqrt(np.array([[1.0, 0.5], [0.0, 1.0]]))
