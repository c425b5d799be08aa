"""Dense linear-algebra kernels used throughout the package.

All functions are pure and operate on plain ``numpy.ndarray`` inputs.
Bases are ``(p, r)`` arrays with orthonormal columns; projectors are
``(p, p)`` symmetric idempotent arrays.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateBasisError, DimensionError, NotPSDError, ValidationError

__all__ = [
    "as_matrix",
    "truncated_svd",
    "qr_orthonormalize",
    "projector",
    "subspace_distance",
    "psd_sqrt",
    "sign_normalize",
    "is_orthonormal",
]

RANK_TOL = 1e-12
ORTHO_TOL = 1e-10


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a finite 2-D float array or raise ``ValidationError``."""
    a = np.asarray(m, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains non-finite entries")
    return a


def sign_normalize(left: np.ndarray, right: np.ndarray | None = None):
    """Flip column signs so each column of ``left`` has a positive
    largest-magnitude entry; paired ``right`` columns are flipped too.

    Ties in magnitude resolve to the lowest row index.
    """
    left = np.array(left, dtype=float, copy=True)
    if left.size == 0:
        return (left, right) if right is not None else left
    idx = np.argmax(np.abs(left), axis=0)
    signs = np.sign(left[idx, np.arange(left.shape[1])])
    signs[signs == 0] = 1.0
    left *= signs
    if right is None:
        return left
    right = np.array(right, dtype=float, copy=True) * signs
    return left, right


def truncated_svd(m, r: int):
    """Top-``r`` singular triplets of ``m``.

    Returns
    -------
    left : (rows, r) ndarray
    singular_values : (r,) ndarray, nonincreasing
    right : (cols, r) ndarray

    Columns are sign-normalized (see :func:`sign_normalize`); compare
    results through spans or projectors rather than raw columns.
    """
    a = as_matrix(m)
    r = int(r)
    if not 1 <= r <= min(a.shape):
        raise DimensionError(f"rank {r} out of range for a {a.shape[0]}x{a.shape[1]} matrix")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    left, right = sign_normalize(u[:, :r], vt[:r].T)
    return left, np.maximum(s[:r], 0.0), right


def qr_orthonormalize(m) -> np.ndarray:
    """Orthonormal basis for the column span of ``m`` via thin QR.

    Raises ``DegenerateBasisError`` when ``m`` is numerically rank
    deficient (a diagonal entry of R at or below ``1e-12 * ||m||_F``).
    """
    a = np.asarray(m, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    flat = a.ravel()
    scale = float(np.sqrt(flat @ flat))
    if a.shape[1] == 1:
        if scale <= 0.0 or not np.isfinite(scale):
            raise DegenerateBasisError("cannot orthonormalize a zero column")
        return a / scale
    if a.shape[1] > a.shape[0]:
        raise DegenerateBasisError(f"{a.shape[1]} columns cannot be orthonormal in R^{a.shape[0]}")
    q, rr = np.linalg.qr(a)
    diag = np.abs(np.diag(rr))
    if scale == 0.0 or diag.min() <= RANK_TOL * scale:
        raise DegenerateBasisError(
            f"matrix has numerical rank below {a.shape[1]} (min |R_ii| = {diag.min():.3g})"
        )
    return q


def projector(basis) -> np.ndarray:
    """Orthogonal projector ``B B^T`` onto the span of an orthonormal basis."""
    b = np.asarray(basis, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    return b @ b.T


def is_orthonormal(basis, tol: float = ORTHO_TOL) -> bool:
    b = np.asarray(basis, dtype=float)
    gram = b.T @ b
    return bool(np.max(np.abs(gram - np.eye(b.shape[1]))) <= tol)


def subspace_distance(a, b) -> float:
    """Normalized projector distance ``||P_a - P_b||_F / sqrt(2 r)``.

    Both arguments must be orthonormal bases of equal shape. The result
    lies in [0, 1]: 0 for identical spans, 1 for orthogonal ones.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if a.shape != b.shape:
        raise DimensionError(f"bases have different shapes {a.shape} and {b.shape}")
    r = a.shape[1]
    d = np.linalg.norm(projector(a) - projector(b)) / np.sqrt(2.0 * r)
    return float(min(max(d, 0.0), 1.0))


def psd_sqrt(m) -> np.ndarray:
    """Symmetric square root of a symmetric positive semi-definite matrix.

    Eigenvalues down to ``-1e-10 * ||m||_F`` are treated as round-off and
    clipped to zero; anything below ``-1e-6 * ||m||_F`` raises
    ``NotPSDError``.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"psd_sqrt needs a square matrix, got {a.shape}")
    if np.max(np.abs(a - a.T)) > 1e-10 * max(1.0, np.abs(a).max()):
        raise ValidationError("psd_sqrt needs a symmetric matrix")
    a = 0.5 * (a + a.T)
    w, v = np.linalg.eigh(a)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    if w.min() < -1e-6 * scale:
        raise NotPSDError(f"matrix is not PSD (min eigenvalue {w.min():.3g})")
    w = np.clip(w, 0.0, None)
    s = (v * np.sqrt(w)) @ v.T
    return 0.5 * (s + s.T)
