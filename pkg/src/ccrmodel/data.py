"""Grouped paired datasets and the sample cross-covariance difference.

Group cross-covariances divide by the group size ``n_g`` (not
``n_g - 1``): the estimator is the mean of outer products of
within-group centered observations. Statistical packages that default to
the unbiased divisor will give values larger by ``n_g / (n_g - 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Hashable, Sequence

import numpy as np

from .errors import DimensionError, StateError, ValidationError

__all__ = [
    "GroupedDataset",
    "CrossCovDifference",
    "center_within_group",
    "group_cross_covariance",
    "phi_tilde",
]


@dataclass(frozen=True, eq=False)
class GroupedDataset:
    """Paired observation blocks ``x`` (N x p1) and ``y`` (N x p2) with a
    group label per row.

    ``group_order`` fixes the canonical label order; for two groups its
    first entry plays "group 1" (the sign of the covariance difference
    depends on it). Defaults to the sorted unique labels.
    """

    x: np.ndarray
    y: np.ndarray
    labels: np.ndarray
    x_names: tuple[str, ...] | None = None
    y_names: tuple[str, ...] | None = None
    centered: bool = False
    group_order: tuple = field(default=())

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if y.ndim == 1:
            y = y[:, None]
        labels = np.asarray(self.labels)
        if x.ndim != 2 or y.ndim != 2:
            raise DimensionError("x and y must be 2-D observation blocks")
        if x.shape[0] != y.shape[0] or labels.shape != (x.shape[0],):
            raise DimensionError(
                f"observation counts differ: x={x.shape[0]}, y={y.shape[0]}, labels={labels.shape}"
            )
        if x.shape[1] < 1 or y.shape[1] < 1:
            raise DimensionError("each block needs at least one variable")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValidationError("dataset contains missing or non-finite values")
        uniq, counts = np.unique(labels, return_counts=True)
        small = [u for u, c in zip(uniq.tolist(), counts) if c < 2]
        if small:
            raise ValidationError(f"groups {small} have fewer than 2 observations")
        order = tuple(self.group_order) if self.group_order else tuple(uniq.tolist())
        if sorted(map(str, order)) != sorted(map(str, uniq.tolist())) or len(order) != len(uniq):
            raise ValidationError(f"group_order {order} does not match labels {uniq.tolist()}")
        for name, names, p in (("x_names", self.x_names, x.shape[1]), ("y_names", self.y_names, y.shape[1])):
            if names is not None and len(names) != p:
                raise DimensionError(f"{name} has {len(names)} entries for {p} columns")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "group_order", order)
        if self.x_names is not None:
            object.__setattr__(self, "x_names", tuple(self.x_names))
        if self.y_names is not None:
            object.__setattr__(self, "y_names", tuple(self.y_names))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p1(self) -> int:
        return self.x.shape[1]

    @property
    def p2(self) -> int:
        return self.y.shape[1]

    @property
    def groups(self) -> tuple:
        return self.group_order

    def mask(self, g: Hashable) -> np.ndarray:
        m = self.labels == g
        if not m.any():
            raise KeyError(f"unknown group label {g!r}; known: {list(self.group_order)}")
        return m

    def group_size(self, g: Hashable) -> int:
        return int(self.mask(g).sum())

    def group_block(self, g: Hashable) -> tuple[np.ndarray, np.ndarray]:
        m = self.mask(g)
        return self.x[m], self.y[m]

    def subset(self, rows: Sequence[int] | np.ndarray) -> "GroupedDataset":
        """Rows ``rows`` as a new (uncentered-flag) dataset with the same names."""
        rows = np.asarray(rows)
        return replace(self, x=self.x[rows], y=self.y[rows], labels=self.labels[rows], centered=False)

    @classmethod
    def from_groups(cls, blocks, names=None, x_names=None, y_names=None) -> "GroupedDataset":
        """Build from a list of ``(x_g, y_g)`` pairs; labels default to 1..K."""
        names = list(range(1, len(blocks) + 1)) if names is None else list(names)
        xs = [np.atleast_2d(np.asarray(b[0], dtype=float)) for b in blocks]
        ys = [np.atleast_2d(np.asarray(b[1], dtype=float)) for b in blocks]
        labels = np.concatenate([np.full(len(xg), g) for g, xg in zip(names, xs)])
        return cls(np.vstack(xs), np.vstack(ys), labels, x_names, y_names, group_order=tuple(names))


@dataclass(frozen=True, eq=False)
class CrossCovDifference:
    """Sample difference ``Sigma_XY(g1) - Sigma_XY(g2)`` with its provenance."""

    phi: np.ndarray
    group_sizes: tuple[int, int]
    group_pair: tuple

    @property
    def shape(self) -> tuple[int, int]:
        return self.phi.shape


def center_within_group(d: GroupedDataset) -> GroupedDataset:
    """Subtract per-group column means from both blocks; idempotent."""
    x = np.array(d.x, copy=True)
    y = np.array(d.y, copy=True)
    for g in d.groups:
        m = d.labels == g
        x[m] -= x[m].mean(axis=0)
        y[m] -= y[m].mean(axis=0)
    return replace(d, x=x, y=y, centered=True)


def group_cross_covariance(d: GroupedDataset, g: Hashable) -> np.ndarray:
    """``(1/n_g) * X_g^T Y_g`` for a within-group centered dataset."""
    if not d.centered:
        raise StateError("group_cross_covariance needs a within-group centered dataset")
    xg, yg = d.group_block(g)
    return xg.T @ yg / xg.shape[0]


def phi_tilde(d: GroupedDataset, g1: Hashable | None = None, g2: Hashable | None = None) -> CrossCovDifference:
    """Sample cross-covariance difference between groups ``g1`` and ``g2``.

    Without explicit labels the dataset must have exactly two groups and
    ``group_order`` decides which one comes first.
    """
    if g1 is None and g2 is None:
        if len(d.groups) != 2:
            raise ValidationError(f"expected two groups, found {len(d.groups)}; pass g1 and g2")
        g1, g2 = d.groups
    if g1 == g2:
        raise ValidationError("phi_tilde needs two distinct groups")
    phi = group_cross_covariance(d, g1) - group_cross_covariance(d, g2)
    return CrossCovDifference(phi, (d.group_size(g1), d.group_size(g2)), (g1, g2))
