"""Sparse low-rank estimation of a cross-covariance difference.

The estimator alternates between the two sides of the difference matrix:
multiply by the current basis of the other side, keep the ``s`` rows with
the largest Euclidean norms, and re-orthonormalize. Iteration starts from
the top-``r`` singular vectors and stops once neither projector moves by
more than ``tol`` in squared Frobenius norm.

Ties in the row-norm ranking keep the lower index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .data import CrossCovDifference, GroupedDataset
from .errors import DegenerateBasisError, DimensionError, StateError, UndefinedCorrelationError, ValidationError
from .linalg import as_matrix, qr_orthonormalize, sign_normalize, truncated_svd

__all__ = [
    "CcrConfig",
    "CcrFit",
    "fit",
    "covariance_differences",
    "correlation_differences",
    "top_rows",
    "two_way_iterate",
]


@dataclass(frozen=True)
class CcrConfig:
    rank: int = 1
    s1: int = 1
    s2: int = 1
    tol: float = 1e-11
    max_iterations: int = 1000

    def __post_init__(self):
        if self.rank < 1:
            raise DimensionError(f"rank must be >= 1, got {self.rank}")
        if self.s1 < 1 or self.s2 < 1:
            raise DimensionError(f"sparsity levels must be >= 1, got ({self.s1}, {self.s2})")
        if self.rank > min(self.s1, self.s2):
            raise DimensionError(
                f"rank {self.rank} exceeds min(s1, s2) = {min(self.s1, self.s2)}; "
                "thresholded blocks cannot support it"
            )
        if not self.tol > 0:
            raise ValidationError("tol must be positive")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")

    @property
    def sparsity(self) -> tuple[int, int]:
        return (self.s1, self.s2)

    def check_dims(self, p1: int, p2: int) -> None:
        if self.s1 > p1 or self.s2 > p2:
            raise DimensionError(f"sparsity ({self.s1}, {self.s2}) exceeds dimensions ({p1}, {p2})")


@dataclass(eq=False)
class CcrFit:
    """Result of :func:`fit`.

    ``u_hat`` / ``v_hat`` have orthonormal columns and exactly zero rows
    outside ``selected_x`` / ``selected_y``. Columns are ordered by
    decreasing ``deltas``. When ``converged`` is False, ``message`` says
    why; a degenerate fit carries a coordinate placeholder basis.
    """

    u_hat: np.ndarray
    v_hat: np.ndarray
    phi_hat: np.ndarray
    selected_x: np.ndarray
    selected_y: np.ndarray
    deltas: np.ndarray
    iterations: int
    converged: bool
    trace: list[float] = field(default_factory=list)
    message: str = ""
    config: CcrConfig | None = None
    etas: np.ndarray | None = None

    @property
    def rank(self) -> int:
        return self.u_hat.shape[1]

    @property
    def p_u(self) -> np.ndarray:
        return self.u_hat @ self.u_hat.T

    @property
    def p_v(self) -> np.ndarray:
        return self.v_hat @ self.v_hat.T

    @property
    def degenerate(self) -> bool:
        return (not self.converged) and self.message.startswith("degenerate")


def top_rows(m: np.ndarray, s: int) -> np.ndarray:
    """Sorted indices of the ``s`` rows of ``m`` with the largest norms.

    A stable sort on negated norms keeps the lower index among ties.
    """
    sq = np.einsum("ij,ij->i", m, m)
    return np.sort(np.argsort(-sq, kind="stable")[:s])


def _qr_rows(block: np.ndarray, rows: np.ndarray, p: int, r: int) -> np.ndarray:
    # orthonormalize only the kept rows so the others stay exactly zero
    out = np.zeros((p, r))
    out[rows] = qr_orthonormalize(block[rows])
    return out


def _svd_rows(block: np.ndarray, rows: np.ndarray, p: int, r: int) -> np.ndarray:
    sub = block[rows]
    u, s, _ = np.linalg.svd(sub, full_matrices=False)
    if s.size < r or s[r - 1] <= 1e-12 * max(s[0], np.finfo(float).tiny) or s[0] == 0.0:
        raise DegenerateBasisError(f"thresholded block has numerical rank below {r}")
    out = np.zeros((p, r))
    out[rows] = u[:, :r]
    return out


def _proj_change(a: np.ndarray, b: np.ndarray) -> float:
    # ||aa' - bb'||_F^2 = 2r - 2||a'b||_F^2 for orthonormal a, b
    c = (a.T @ b).ravel()
    return max(0.0, 2.0 * a.shape[1] - 2.0 * float(c @ c))


def two_way_iterate(
    left_mul: Callable[[np.ndarray], np.ndarray],
    right_mul: Callable[[np.ndarray], np.ndarray],
    u0: np.ndarray,
    v0: np.ndarray,
    cfg: CcrConfig,
    orthonormalize: Callable = _qr_rows,
):
    """Core alternating thresholding loop shared by the binary and
    multi-group estimators.

    Returns ``(u, v, sel_x, sel_y, iterations, converged, trace, message)``.
    """
    p1, p2, r = u0.shape[0], v0.shape[0], cfg.rank
    u, v = u0, v0
    sel_x = sel_y = None
    trace: list[float] = []
    for t in range(1, cfg.max_iterations + 1):
        try:
            u_mul = left_mul(v)
            rows_x = top_rows(u_mul, cfg.s1)
            u_new = orthonormalize(u_mul, rows_x, p1, r)
            v_mul = right_mul(u_new)
            rows_y = top_rows(v_mul, cfg.s2)
            v_new = orthonormalize(v_mul, rows_y, p2, r)
        except DegenerateBasisError as exc:
            return u, v, sel_x, sel_y, t, False, trace, f"degenerate: {exc} (iteration {t})"
        change = max(_proj_change(u_new, u), _proj_change(v_new, v))
        trace.append(change)
        u, v, sel_x, sel_y = u_new, v_new, rows_x, rows_y
        if change <= cfg.tol:
            return u, v, sel_x, sel_y, t, True, trace, ""
    return u, v, sel_x, sel_y, cfg.max_iterations, False, trace, (
        f"not converged after {cfg.max_iterations} iterations (last change {trace[-1]:.3g})"
    )


def _placeholder(p: int, s: int, r: int, sel):
    sel = np.arange(s) if sel is None else sel
    b = np.zeros((p, r))
    b[sel[:r], np.arange(r)] = 1.0
    return b, sel


def _align(u: np.ndarray, v: np.ndarray, phi: np.ndarray):
    """Rotate within the spans so ``u_i' phi v_i`` are the nonincreasing
    singular values of ``u' phi v``."""
    core = u.T @ phi @ v
    a, s, bt = np.linalg.svd(core)
    u2, v2 = u @ a, v @ bt.T
    u2, v2 = sign_normalize(u2, v2)
    return u2, v2, s


def _phi_array(phi) -> np.ndarray:
    if isinstance(phi, CrossCovDifference):
        return as_matrix(phi.phi, "phi")
    return as_matrix(phi, "phi")


def fit(phi, cfg: CcrConfig) -> CcrFit:
    """Fit the sparse rank-``cfg.rank`` decomposition of a covariance
    difference.

    Parameters
    ----------
    phi : CrossCovDifference or array_like, shape (p1, p2)
    cfg : CcrConfig

    Returns
    -------
    CcrFit
        Non-convergence (including a rank-deficient thresholded block) is
        reported through ``converged`` and ``message``, never raised.
    """
    a = _phi_array(phi)
    p1, p2 = a.shape
    cfg.check_dims(p1, p2)
    r = cfg.rank
    u0, _, v0 = truncated_svd(a, r)
    at = a.T
    u, v, sel_x, sel_y, it, ok, trace, msg = two_way_iterate(lambda vv: a @ vv, lambda uu: at @ uu, u0, v0, cfg)
    if msg.startswith("degenerate") and (sel_x is None or sel_y is None):
        u, sel_x = _placeholder(p1, cfg.s1, r, sel_x)
        v, sel_y = _placeholder(p2, cfg.s2, r, sel_y)
    if ok or not msg.startswith("degenerate"):
        u, v, deltas = _align(u, v, a)
    else:
        deltas = np.einsum("ir,ij,jr->r", u, a, v)
    phi_hat = (u @ (u.T @ a @ v)) @ v.T
    return CcrFit(u, v, phi_hat, np.asarray(sel_x), np.asarray(sel_y), deltas, it, ok, trace, msg, cfg)


def covariance_differences(result: CcrFit, phi) -> np.ndarray:
    """``u_i' phi v_i`` per direction, made nonnegative by flipping
    ``v_i`` in place on ``result`` when needed."""
    a = _phi_array(phi)
    d = np.einsum("ir,ij,jr->r", result.u_hat, a, result.v_hat)
    neg = d < 0
    if np.any(neg):
        result.v_hat[:, neg] *= -1.0
        d = np.abs(d)
    return d


def _pearson(a: np.ndarray, b: np.ndarray, what: str) -> float:
    a = a - a.mean()
    b = b - b.mean()
    sa, sb = np.sqrt(a @ a), np.sqrt(b @ b)
    scale = max(np.abs(a).max(initial=0.0), np.abs(b).max(initial=0.0), 1.0)
    if sa <= 1e-12 * scale * np.sqrt(a.size) or sb <= 1e-12 * scale * np.sqrt(b.size):
        raise UndefinedCorrelationError(f"zero score variance in {what}")
    return float(np.clip((a @ b) / (sa * sb), -1.0, 1.0))


def score_correlation(result: CcrFit, d: GroupedDataset, g, direction: int = 0) -> float:
    """Pearson correlation of the ``direction``-th projected score pair in group ``g``."""
    xg, yg = d.group_block(g)
    return _pearson(xg @ result.u_hat[:, direction], yg @ result.v_hat[:, direction],
                    f"group {g!r}, direction {direction + 1}")


def correlation_differences(result: CcrFit, d: GroupedDataset) -> np.ndarray:
    """Group-1 minus group-2 correlation of each projected score pair.

    Values lie in [-2, 2]. The dataset must be centered and binary;
    group order follows ``d.group_order``.
    """
    if not d.centered:
        raise StateError("correlation_differences needs a within-group centered dataset")
    if len(d.groups) != 2:
        raise ValidationError(f"correlation differences need two groups, found {len(d.groups)}")
    if result.u_hat.shape[0] != d.p1 or result.v_hat.shape[0] != d.p2:
        raise DimensionError("fit and dataset dimensions differ")
    g1, g2 = d.groups
    return np.array([
        score_correlation(result, d, g1, i) - score_correlation(result, d, g2, i)
        for i in range(result.rank)
    ])
