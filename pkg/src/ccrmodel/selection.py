"""Choosing the sparsity levels ``(s1, s2)``.

Two routes are provided:

* :func:`spss_select` -- a sequential sign-flip permutation procedure on
  leave-two-out (LTO) resamples. ``s1`` grows from 1 while the increment in
  the leading covariance difference from ``s1 = i`` to ``i + 1`` is
  significant at *every* companion level ``s2 = k``; the sweep for ``s2``
  is symmetric.
* :func:`ic_surface` -- a BIC-type criterion
  ``-N log ||P_U phi P_V||_F + (s1 + s2) log N`` evaluated on the full grid.

Permutation p-values use the add-one form ``(count + 1) / (B + 1)``.

The default statistic tests the raw per-split increments. Because the
leading difference can only grow when a row is added to the support, those
increments are almost always positive and the test then rejects at every
step. ``SpssConfig(statistic="jackknife")`` tests delete-two jackknife
pseudo-values ``N * inc_full - (N - 2) * inc_split`` instead; the full-sample
increment ``inc_full`` removes most of the overfitting bias. This variant
is an extension and is not used unless requested.

Reproducibility: permutation draws are generated in fixed blocks of
``PERM_BLOCK`` sign vectors, block ``b`` seeded from
``SeedSequence(seed, spawn_key=(b,))``. Splitting blocks across workers
therefore never changes the result.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .data import GroupedDataset, center_within_group, phi_tilde
from .errors import ValidationError
from .estimator import CcrConfig, fit

__all__ = [
    "SpssConfig",
    "SpssResult",
    "IcSurface",
    "lto_phis",
    "lto_delta_samples",
    "sign_flip_pvalue",
    "exact_sign_flip_pvalue",
    "spss_select",
    "ic_surface",
    "ic_value",
]

PERM_BLOCK = 2048


@dataclass(frozen=True)
class SpssConfig:
    permutations: int = 100_000
    alpha: float = 0.05
    seed: int = 0
    tol: float = 1e-11
    max_iterations: int = 1000
    statistic: str = "lto"

    def __post_init__(self):
        if self.statistic not in ("lto", "jackknife"):
            raise ValidationError(f"statistic must be 'lto' or 'jackknife', got {self.statistic!r}")
        if self.permutations < 1000:
            raise ValidationError(f"permutations must be >= 1000, got {self.permutations}")
        # closed interval so the stopping rule's boundary behaviour is reachable
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclass(eq=False)
class SpssResult:
    selected: tuple[int, int]
    pvalues_s1: np.ndarray
    pvalues_s2: np.ndarray
    lto_split_count: int
    excluded_fits: int = 0
    warnings: list[str] = field(default_factory=list)

    def tidy(self) -> list[dict]:
        """Rows ``(sweep, step, fixed, p_value)`` for every test performed."""
        rows = []
        for sweep, grid in (("s1", self.pvalues_s1), ("s2", self.pvalues_s2)):
            for (i, k), p in np.ndenumerate(grid):
                if np.isfinite(p):
                    rows.append({"sweep": sweep, "step": i + 1, "fixed": k + 1, "p_value": float(p)})
        return rows


@dataclass(eq=False)
class IcSurface:
    """IC values on the ``p1 x p2`` grid; cell ``[s1-1, s2-1]``.

    Infeasible (``s < rank``), non-convergent or zero-norm cells hold ``inf``.
    """

    values: np.ndarray
    argmin: tuple[int, int]
    n: int
    norms: np.ndarray


def _check_binary(d: GroupedDataset, min_size: int = 2):
    if len(d.groups) != 2:
        raise ValidationError(f"binary groups required, found {len(d.groups)}")
    g1, g2 = d.groups
    n1, n2 = d.group_size(g1), d.group_size(g2)
    if min(n1, n2) < min_size:
        raise ValidationError(f"each group needs at least {min_size} observations, got ({n1}, {n2})")
    return g1, g2, n1, n2


def _loo_cross_covs(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Centered cross-covariance of a group with each row left out in turn.

    Shape ``(n, p1, p2)``; entry ``i`` equals ``X_c' Y_c / (n - 1)`` for the
    remaining ``n - 1`` rows re-centered.
    """
    n = x.shape[0]
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    full = xc.T @ yc
    # dropping row i from centered data: sum x y' loses x_i y_i', the new
    # means are -x_i/(n-1), -y_i/(n-1)
    outer = np.einsum("ni,nj->nij", xc, yc)
    m = n - 1
    return (full[None] - outer) / m - outer / (m * m)


def lto_phis(d: GroupedDataset) -> np.ndarray:
    """Covariance differences for all leave-two-out splits.

    Returns shape ``(n1 * n2, p1, p2)`` in i-major, j-minor order where
    ``i`` indexes group-1 rows and ``j`` group-2 rows (dataset order).
    """
    g1, g2, n1, n2 = _check_binary(d, 3)
    c1 = _loo_cross_covs(*d.group_block(g1))
    c2 = _loo_cross_covs(*d.group_block(g2))
    return (c1[:, None] - c2[None, :]).reshape(n1 * n2, d.p1, d.p2)


def _leading_deltas(phis: np.ndarray, cfg: CcrConfig) -> np.ndarray:
    out = np.full(len(phis), np.nan)
    for idx, a in enumerate(phis):
        res = fit(a, cfg)
        if res.converged:
            out[idx] = res.deltas[0]
    return out


def _chunked(n: int, n_jobs: int):
    n_chunks = max(1, min(n, n_jobs))
    bounds = np.linspace(0, n, n_chunks + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _deltas_for_cell(phis, cfg: CcrConfig, n_jobs: int) -> np.ndarray:
    if n_jobs == 1:
        return _leading_deltas(phis, cfg)
    parts = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_leading_deltas)(phis[a:b], cfg) for a, b in _chunked(len(phis), n_jobs)
    )
    return np.concatenate(parts)


def lto_delta_samples(d: GroupedDataset, s1: int, s2: int, r: int = 1, *, tol: float = 1e-11,
                      max_iterations: int = 1000, n_jobs: int = 1) -> np.ndarray:
    """Leading covariance difference on every leave-two-out split.

    Each split drops one row from each group and refits the re-centered
    data at ``(s1, s2, r)``. Non-convergent splits are returned as NaN
    and counted in a ``RuntimeWarning``.
    """
    phis = lto_phis(d)
    cfg = CcrConfig(r, s1, s2, tol, max_iterations)
    cfg.check_dims(d.p1, d.p2)
    out = _deltas_for_cell(phis, cfg, n_jobs)
    bad = int(np.isnan(out).sum())
    if bad:
        warnings.warn(f"{bad} of {len(out)} LTO fits did not converge and were excluded", RuntimeWarning)
    return out


def _seed_entropy(seed) -> list[int]:
    return [int(s) for s in np.atleast_1d(seed)]


def _count_block(d: np.ndarray, t_obs: float, slack: float, entropy, b: int, size: int) -> int:
    rng = np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=(b,)))
    signs = rng.integers(0, 2, size=(size, d.size), dtype=np.int8) * 2 - 1
    means = (signs @ d) / d.size
    return int(np.count_nonzero(means >= t_obs - slack))


def sign_flip_pvalue(differences, permutations: int = 100_000, seed=0, *, add_one: bool = True,
                     n_jobs: int = 1) -> float:
    """One-sided sign-flip permutation p-value for ``mean(differences) > 0``.

    Parameters
    ----------
    differences : array_like
        Paired differences; NaNs are dropped.
    permutations : int
        Number of random sign vectors.
    seed : int or sequence of int
        Entropy for the block seed sequence.
    add_one : bool
        Return ``(count + 1) / (B + 1)`` (default) instead of ``count / B``.

    The differences are sorted first, so the result does not depend on
    their input order. Permuted means within ``1e-12 * max|d|`` of the
    observed mean count as ties (and therefore as exceedances).
    """
    d = np.asarray(differences, dtype=float).ravel()
    d = np.sort(d[np.isfinite(d)])
    if d.size == 0:
        raise ValidationError("sign_flip_pvalue needs at least one finite difference")
    t_obs = float(d.mean())
    slack = 1e-12 * float(np.abs(d).max())
    entropy = _seed_entropy(seed)
    n_blocks = math.ceil(permutations / PERM_BLOCK)
    sizes = [min(PERM_BLOCK, permutations - b * PERM_BLOCK) for b in range(n_blocks)]
    if n_jobs == 1:
        counts = [_count_block(d, t_obs, slack, entropy, b, s) for b, s in enumerate(sizes)]
    else:
        counts = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_count_block)(d, t_obs, slack, entropy, b, s) for b, s in enumerate(sizes)
        )
    count = sum(counts)
    if add_one:
        return (count + 1) / (permutations + 1)
    return count / permutations


def exact_sign_flip_pvalue(differences) -> float:
    """Exact one-sided p-value by enumerating all ``2**L`` sign patterns."""
    d = np.asarray(differences, dtype=float).ravel()
    if d.size > 20:
        raise ValidationError("exact enumeration is limited to 20 differences")
    t_obs = d.mean()
    slack = 1e-12 * float(np.abs(d).max(initial=0.0))
    codes = np.arange(2 ** d.size)
    bits = (codes[:, None] >> np.arange(d.size)) & 1
    means = ((2 * bits - 1) @ d) / d.size
    return float(np.mean(means >= t_obs - slack))


class _CellCache:
    """Memoized LTO leading-delta vectors keyed by ``(s1, s2)``.

    ``full(s1, s2)`` gives the full-sample leading delta (NaN on failure).
    """

    def __init__(self, d: GroupedDataset, r: int, tol: float, max_iterations: int, n_jobs: int):
        self.phis = lto_phis(d)
        self.phi_full = phi_tilde(center_within_group(d)).phi
        self.n = d.n
        self.r, self.tol, self.max_iterations, self.n_jobs = r, tol, max_iterations, n_jobs
        self.cells: dict[tuple[int, int], np.ndarray] = {}
        self.full_cells: dict[tuple[int, int], float] = {}

    def _cfg(self, s1, s2):
        return CcrConfig(self.r, s1, s2, self.tol, self.max_iterations)

    def __call__(self, s1: int, s2: int) -> np.ndarray:
        key = (s1, s2)
        if key not in self.cells:
            self.cells[key] = _deltas_for_cell(self.phis, self._cfg(s1, s2), self.n_jobs)
        return self.cells[key]

    def full(self, s1: int, s2: int) -> float:
        key = (s1, s2)
        if key not in self.full_cells:
            res = fit(self.phi_full, self._cfg(s1, s2))
            self.full_cells[key] = float(res.deltas[0]) if res.converged else math.nan
        return self.full_cells[key]

    def increments(self, lo, hi, statistic: str) -> np.ndarray:
        diff = self(*hi) - self(*lo)
        if statistic == "jackknife":
            inc_full = self.full(*hi) - self.full(*lo)
            diff = self.n * inc_full - (self.n - 2) * diff
        return diff


def _sweep(cache: _CellCache, n_steps: int, n_fixed: int, r: int, cfg: SpssConfig, sweep_id: int,
           transpose: bool, n_jobs: int, notes: list[str]):
    grid = np.full((n_steps, n_fixed), np.nan)
    excluded = 0
    chosen = None
    for i in range(r, n_steps + 1):
        significant = True
        for k in range(r, n_fixed + 1):
            lo, hi = ((k, i), (k, i + 1)) if transpose else ((i, k), (i + 1, k))
            diff = cache.increments(lo, hi, cfg.statistic)
            ok = np.isfinite(diff)
            excluded += int((~ok).sum())
            if not ok.any():
                p = 1.0
                notes.append(f"all LTO pairs failed at step {i}, fixed level {k}")
            else:
                p = sign_flip_pvalue(diff[ok], cfg.permutations, (cfg.seed, sweep_id, i, k), n_jobs=n_jobs)
            grid[i - 1, k - 1] = p
            if p > cfg.alpha:
                significant = False
        if not significant:
            chosen = i
            break
    if chosen is None:
        chosen = n_steps
        notes.append(f"sweep {'s2' if transpose else 's1'} reached the boundary {n_steps} without stopping")
    return chosen, grid, excluded


def spss_select(d: GroupedDataset, r: int = 1, cfg: SpssConfig | None = None, *, n_jobs: int = 1) -> SpssResult:
    """Sequential permutation selection of ``(s1, s2)``.

    For ``s1``: at step ``i`` and every ``k`` in ``r..p2`` the LTO paired
    differences ``delta(i+1, k) - delta(i, k)`` (same split on both sides)
    are tested with :func:`sign_flip_pvalue`. If every p-value is at most
    ``alpha`` the step advances, otherwise ``s1 = i``. Reaching
    ``i = p1 - 1`` stops there with a warning. ``s2`` is swept the same
    way over fixed ``s1`` levels. Both sweeps share one cache of fits.
    ``cfg.statistic`` selects the tested quantity (see module docstring).
    """
    cfg = cfg or SpssConfig()
    _, _, n1, n2 = _check_binary(d, 3)
    if d.p1 < r + 1 or d.p2 < r + 1:
        raise ValidationError("each block needs more than `rank` variables for a sparsity sweep")
    cache = _CellCache(d, r, cfg.tol, cfg.max_iterations, n_jobs)
    notes: list[str] = []
    s1, grid1, ex1 = _sweep(cache, d.p1 - 1, d.p2, r, cfg, 0, False, n_jobs, notes)
    s2, grid2, ex2 = _sweep(cache, d.p2 - 1, d.p1, r, cfg, 1, True, n_jobs, notes)
    excluded = ex1 + ex2
    if excluded:
        notes.append(f"{excluded} LTO difference pairs excluded after non-convergent fits")
    for msg in notes:
        warnings.warn(msg, RuntimeWarning)
    return SpssResult((s1, s2), grid1, grid2, n1 * n2, excluded, notes)


def ic_value(norm: float, s1: int, s2: int, n: int) -> float:
    """``-n log(norm) + (s1 + s2) log(n)``; ``inf`` when ``norm`` is not positive."""
    if not norm > 0 or not np.isfinite(norm):
        return math.inf
    return -n * math.log(norm) + (s1 + s2) * math.log(n)


def ic_surface(d: GroupedDataset, r: int = 1, *, tol: float = 1e-11, max_iterations: int = 1000) -> IcSurface:
    """Information criterion on every feasible ``(s1, s2)`` with ``s >= r``.

    One covariance difference from the centered data is reused for all
    cells. Ties in the minimum resolve to the smallest ``s1`` then ``s2``.
    """
    _check_binary(d)
    dc = d if d.centered else center_within_group(d)
    phi = phi_tilde(dc).phi
    n = d.n
    values = np.full((d.p1, d.p2), np.inf)
    norms = np.full((d.p1, d.p2), np.nan)
    for s1 in range(r, d.p1 + 1):
        for s2 in range(r, d.p2 + 1):
            res = fit(phi, CcrConfig(r, s1, s2, tol, max_iterations))
            if not res.converged:
                continue
            nrm = float(np.linalg.norm(res.phi_hat))
            norms[s1 - 1, s2 - 1] = nrm
            values[s1 - 1, s2 - 1] = ic_value(nrm, s1, s2, n)
    flat = int(np.argmin(values))
    i, j = divmod(flat, d.p2)
    return IcSurface(values, (i + 1, j + 1), n, norms)
