"""Shared sparse directions for a conditioning variable with K >= 3 levels.

The pairwise covariance differences are stacked side by side
(``p1 x B*p2``) and on top of each other (``B*p1 x p2``). For K = 3 the
blocks follow the cyclic order (1,2), (2,3), (3,1); for larger K all
unordered pairs are used in lexicographic order.

Each half-step multiplies a stack by the current basis of the other side
replicated block-diagonally, so every pair contributes its own ``r``
columns (``Phi_b V`` for each block ``b``). Summing the blocks instead
would cancel exactly for the cyclic K = 3 layout, because the three
differences add up to zero. After row thresholding, the top-``r`` left
singular vectors of the kept rows give the new basis; with a single block
this is the same span the QR step of the binary estimator produces.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .data import CrossCovDifference, GroupedDataset, center_within_group, phi_tilde
from .errors import ValidationError
from .estimator import CcrConfig, CcrFit, _placeholder, _svd_rows, score_correlation, two_way_iterate
from .linalg import sign_normalize, truncated_svd

__all__ = ["StackedPhi", "build_stacked_phi", "stack_pairwise", "fit_multigroup", "group_score_correlations"]


class UseBinaryPathError(ValidationError):
    hint = "with two groups use phi_tilde() and fit()"


@dataclass(frozen=True, eq=False)
class StackedPhi:
    pairwise: tuple[CrossCovDifference, ...]
    horizontal: np.ndarray
    vertical: np.ndarray

    @property
    def blocks(self) -> int:
        return len(self.pairwise)

    @property
    def p1(self) -> int:
        return self.horizontal.shape[0]

    @property
    def p2(self) -> int:
        return self.vertical.shape[1]


def pair_order(groups) -> list[tuple]:
    groups = list(groups)
    if len(groups) == 3:
        return [(groups[0], groups[1]), (groups[1], groups[2]), (groups[2], groups[0])]
    return list(combinations(groups, 2))


def stack_pairwise(pairwise) -> StackedPhi:
    """Stack a sequence of :class:`CrossCovDifference` blocks (or arrays)."""
    blocks = tuple(
        b if isinstance(b, CrossCovDifference) else CrossCovDifference(np.asarray(b, dtype=float), (0, 0), ("?", "?"))
        for b in pairwise
    )
    mats = [b.phi for b in blocks]
    return StackedPhi(blocks, np.hstack(mats), np.vstack(mats))


def build_stacked_phi(d: GroupedDataset) -> StackedPhi:
    """Pairwise covariance differences of a K >= 3 group dataset, stacked."""
    if len(d.groups) < 3:
        raise UseBinaryPathError(f"build_stacked_phi needs K >= 3 groups, found {len(d.groups)}")
    dc = d if d.centered else center_within_group(d)
    return stack_pairwise([phi_tilde(dc, a, b) for a, b in pair_order(dc.groups)])


def fit_multigroup(sp: StackedPhi, cfg: CcrConfig) -> CcrFit:
    """Shared sparse ``(U, V)`` for all pairwise differences.

    ``deltas[i]`` is the root sum of squares over blocks of
    ``u_i' Phi_b v_i``, which does not depend on block order or on the sign
    convention of each pair. The sign of ``v_i`` makes ``u_i' Phi_b v_i``
    positive for the first block where it is nonzero, so score
    correlations come out larger in the first group of that pair.
    ``phi_hat`` is the projected horizontal stack.
    An all-zero stack is reported as degenerate.
    """
    p1, p2, r = sp.p1, sp.p2, cfg.rank
    cfg.check_dims(p1, p2)
    mats = [b.phi for b in sp.pairwise]
    mats_t = [m.T for m in mats]
    u0, _, _ = truncated_svd(sp.horizontal, r)
    v0, _, _ = truncated_svd(sp.vertical.T, r)

    def left(v):
        return np.hstack([m @ v for m in mats])

    def right(u):
        return np.hstack([m @ u for m in mats_t])

    if not np.any(sp.horizontal):
        u, sel_x = _placeholder(p1, cfg.s1, r, None)
        v, sel_y = _placeholder(p2, cfg.s2, r, None)
        return CcrFit(u, v, np.zeros_like(sp.horizontal), sel_x, sel_y, np.zeros(r), 0, False, [],
                      "degenerate: all pairwise differences are zero", cfg)
    u, v, sel_x, sel_y, it, ok, trace, msg = two_way_iterate(left, right, u0, v0, cfg, _svd_rows)
    if sel_x is None or sel_y is None:
        u, sel_x = _placeholder(p1, cfg.s1, r, sel_x)
        v, sel_y = _placeholder(p2, cfg.s2, r, sel_y)
    pair_vals = np.array([np.einsum("ir,ij,jr->r", u, m, v) for m in mats])
    deltas = np.sqrt(np.sum(pair_vals ** 2, axis=0))
    order = np.argsort(-deltas, kind="stable")
    u, v, deltas = u[:, order], v[:, order], deltas[order]
    u, v = sign_normalize(u, v)
    # relative sign of v_i: make the first nonzero pairwise value positive
    for i in range(r):
        vals = pair_vals[:, order[i]]
        nz = np.flatnonzero(np.abs(vals) > 1e-14 * max(deltas[i], 1e-300))
        if nz.size and np.einsum("i,ij,j->", u[:, i], mats[nz[0]], v[:, i]) < 0:
            v[:, i] *= -1.0
    pu, pv = u @ u.T, v @ v.T
    phi_hat = np.hstack([pu @ m @ pv for m in mats])
    return CcrFit(u, v, phi_hat, np.asarray(sel_x), np.asarray(sel_y), deltas, it, ok, trace, msg, cfg)


def group_score_correlations(result: CcrFit, d: GroupedDataset, direction: int = 0) -> dict:
    """Within-group Pearson correlation of the projected score pair, by label."""
    dc = d if d.centered else center_within_group(d)
    return {g: score_correlation(result, dc, g, direction) for g in dc.groups}
