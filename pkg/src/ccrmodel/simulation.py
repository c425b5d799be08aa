"""Synthetic designs and the replication harness that scores fits on them.

Data model for group ``z``: ``(x, y)`` jointly normal with mean zero and
covariance ``[[S_X, C_z], [C_z', S_Y]]`` where

* ``S_X = blockdiag(c1 * R(s1*), c2 * I)`` with ``R`` an AR(theta) or
  CS(theta) correlation block on the first ``s1*`` coordinates
  (``S_Y`` likewise);
* ``U = S_X^{1/2} O1`` and ``V = S_Y^{1/2} O2``, with ``O`` the unit
  vector of equal weights on the signal coordinates (rank 2 adds
  ``(0, -1, 1, 0, ...) / sqrt(2)``);
* ``C_z = rho_z U V'`` (rank 1) or ``U diag(rho_z1, rho_z2) V'`` (rank 2).

Seeding: replicate ``k``, group ``g`` draws from
``SeedSequence(seed, spawn_key=(k, g))``; bootstrap round ``b`` of
replicate ``k`` uses ``spawn_key=(k, BOOT_KEY, b)``. Any replicate can be
regenerated on its own from the scenario seed.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from joblib import Parallel, delayed

from .data import GroupedDataset, center_within_group, phi_tilde
from .errors import CcrError, DegenerateBasisError, ScenarioError, ValidationError
from .estimator import CcrConfig, CcrFit, correlation_differences, fit
from .linalg import psd_sqrt, qr_orthonormalize, subspace_distance
from .multigroup import build_stacked_phi, fit_multigroup, group_score_correlations

__all__ = [
    "SimScenario",
    "Population",
    "EvalReport",
    "build_population",
    "sample_dataset",
    "evaluate",
    "run_replicate",
    "run_replications",
    "sparsity_sweep",
    "resampling_ratios",
    "correlation_block",
    "PRESETS",
]

BOOT_KEY = 7919


@dataclass(frozen=True)
class SimScenario:
    """Complete generative specification of a synthetic design.

    ``rhos`` holds one entry per group: a float for rank 1, a pair
    ``(rho_z1, rho_z2)`` for rank 2. ``group_sizes`` has the same length.
    """

    p1: int = 18
    p2: int = 15
    s1_true: int = 3
    s2_true: int = 3
    rank: int = 1
    rhos: tuple = (0.9, -0.9)
    c1: float = 3.0
    c2: float = 1.0
    cov_family: str = "ar"
    cov_param: float = 0.7
    group_sizes: tuple = (200, 200)
    seed: int = 0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "rhos", tuple(tuple(r) if isinstance(r, (list, tuple)) else float(r) for r in self.rhos))
        object.__setattr__(self, "group_sizes", tuple(int(n) for n in self.group_sizes))
        if self.rank not in (1, 2):
            raise ScenarioError(f"rank must be 1 or 2, got {self.rank}")
        if len(self.rhos) != len(self.group_sizes) or len(self.rhos) < 2:
            raise ScenarioError("rhos and group_sizes need one entry per group (at least two)")
        if any(n < 2 for n in self.group_sizes):
            raise ScenarioError("every group needs at least two observations")
        if not (1 <= self.s1_true <= self.p1 and 1 <= self.s2_true <= self.p2):
            raise ScenarioError("true sparsity out of range")
        if self.rank == 2 and min(self.s1_true, self.s2_true) < 3:
            raise ScenarioError("rank-2 loadings need at least three signal coordinates")
        if self.cov_family not in ("ar", "cs"):
            raise ScenarioError(f"cov_family must be 'ar' or 'cs', got {self.cov_family!r}")
        for r in self.rhos:
            if self.rank == 1 and isinstance(r, tuple):
                raise ScenarioError("rank-1 scenarios take one rho per group")
            if self.rank == 2 and not (isinstance(r, tuple) and len(r) == 2):
                raise ScenarioError("rank-2 scenarios take a (rho_z1, rho_z2) pair per group")
        if len(self.rhos) == 2 and self.rank == 1 and not self.rhos[0] - self.rhos[1] > 0:
            raise ScenarioError(f"rho1 - rho2 must be positive, got {self.rhos}")

    @property
    def n_groups(self) -> int:
        return len(self.group_sizes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rhos"] = [list(r) if isinstance(r, tuple) else r for r in self.rhos]
        d["group_sizes"] = list(self.group_sizes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimScenario":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValidationError(f"unknown scenario keys: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "SimScenario":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def with_(self, **kw) -> "SimScenario":
        return replace(self, **kw)


@dataclass(frozen=True, eq=False)
class Population:
    sigmas: tuple[np.ndarray, ...]
    sqrt_sigmas: tuple[np.ndarray, ...]
    u: np.ndarray
    v: np.ndarray
    u_true: np.ndarray
    v_true: np.ndarray
    phi_true: np.ndarray
    support_x: np.ndarray
    support_y: np.ndarray


def correlation_block(family: str, param: float, size: int) -> np.ndarray:
    """AR (``param**|i-j|``) or CS (constant off-diagonal ``param``) block."""
    idx = np.arange(size)
    if family == "ar":
        return param ** np.abs(idx[:, None] - idx[None, :]).astype(float)
    if family == "cs":
        return np.full((size, size), param) + (1.0 - param) * np.eye(size)
    raise ScenarioError(f"unknown covariance family {family!r}")


def _marginal(p: int, s: int, sc: SimScenario) -> np.ndarray:
    out = np.eye(p) * sc.c2
    out[:s, :s] = sc.c1 * correlation_block(sc.cov_family, sc.cov_param, s)
    return out


def _loadings(p: int, s: int, rank: int) -> np.ndarray:
    o = np.zeros((p, rank))
    o[:s, 0] = 1.0 / math.sqrt(s)
    if rank == 2:
        o[1, 1], o[2, 1] = -1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)
    return o


def build_population(sc: SimScenario) -> Population:
    """Population covariances of a scenario along with its true bases.

    Raises ``ScenarioError`` naming the group whose covariance is not PSD
    (minimum eigenvalue below ``-1e-8``).
    """
    sx = _marginal(sc.p1, sc.s1_true, sc)
    sy = _marginal(sc.p2, sc.s2_true, sc)
    u = psd_sqrt(sx) @ _loadings(sc.p1, sc.s1_true, sc.rank)
    v = psd_sqrt(sy) @ _loadings(sc.p2, sc.s2_true, sc.rank)
    sigmas, roots, crosses = [], [], []
    for g, rho in enumerate(sc.rhos):
        d = np.atleast_1d(np.asarray(rho, dtype=float))
        cross = (u * d) @ v.T
        sigma = np.block([[sx, cross], [cross.T, sy]])
        w = np.linalg.eigvalsh(sigma)
        if w.min() < -1e-8:
            raise ScenarioError(f"group {g + 1} covariance is not PSD for rho={rho} (min eigenvalue {w.min():.3g})")
        sigmas.append(sigma)
        roots.append(psd_sqrt(sigma))
        crosses.append(cross)
    u_true = qr_orthonormalize(u)
    v_true = qr_orthonormalize(v)
    # exact zeros outside the support (the blockdiag square root keeps it)
    u_true[sc.s1_true:] = 0.0
    v_true[sc.s2_true:] = 0.0
    return Population(tuple(sigmas), tuple(roots), u, v, u_true, v_true, crosses[0] - crosses[1],
                      np.arange(sc.s1_true), np.arange(sc.s2_true))


def _group_rng(seed: int, replicate: int, group: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replicate, group)))


def sample_dataset(sc: SimScenario, replicate: int = 0, population: Population | None = None) -> GroupedDataset:
    """Draw one dataset (uncentered) for replicate ``replicate``; labels are 1..K."""
    pop = population or build_population(sc)
    blocks = []
    for g, (n, root) in enumerate(zip(sc.group_sizes, pop.sqrt_sigmas)):
        z = _group_rng(sc.seed, replicate, g).standard_normal((n, sc.p1 + sc.p2))
        xy = z @ root
        blocks.append((xy[:, : sc.p1], xy[:, sc.p1:]))
    return GroupedDataset.from_groups(blocks)


def evaluate(result: CcrFit, u_true: np.ndarray, v_true: np.ndarray, support_x=None, support_y=None) -> dict:
    """Selection rates and subspace distances of a fit against the truth.

    ``support_*`` default to the nonzero rows of the true bases.
    """
    u_true = np.asarray(u_true, dtype=float)
    v_true = np.asarray(v_true, dtype=float)
    if support_x is None:
        support_x = np.flatnonzero(np.any(u_true != 0, axis=1))
    if support_y is None:
        support_y = np.flatnonzero(np.any(v_true != 0, axis=1))
    row = {}
    for side, sel, sup, p in (("x", result.selected_x, support_x, u_true.shape[0]),
                              ("y", result.selected_y, support_y, v_true.shape[0])):
        sel, sup = set(np.asarray(sel).tolist()), set(np.asarray(sup).tolist())
        row[f"tpr_{side}"] = len(sel & sup) / len(sup)
        row[f"fpr_{side}"] = len(sel - sup) / (p - len(sup)) if p > len(sup) else 0.0
    row["d_u"] = subspace_distance(u_true, result.u_hat)
    row["d_v"] = subspace_distance(v_true, result.v_hat)
    return row


METRIC_ORDER = ("tpr_x", "tpr_y", "fpr_x", "fpr_y", "d_u", "d_v")


@dataclass(eq=False)
class EvalReport:
    """Per-replicate metric rows with their means and standard errors.

    Rows of failed replicates are kept out of ``rows`` and counted in
    ``failures``. Standard errors are ``sd / sqrt(count)`` with ``ddof=1``
    and ``None`` for a single replicate.
    """

    scenario: SimScenario
    rows: list[dict]
    failures: int = 0
    replicate_ids: list[int] = field(default_factory=list)

    @property
    def replicate_count(self) -> int:
        return len(self.rows)

    def metrics(self) -> list[str]:
        keys = [k for k in METRIC_ORDER if self.rows and k in self.rows[0]]
        extra = sorted({k for r in self.rows for k in r} - set(keys))
        return keys + extra

    def values(self, metric: str) -> np.ndarray:
        return np.array([r[metric] for r in self.rows if metric in r], dtype=float)

    def mean(self, metric: str) -> float:
        v = self.values(metric)
        return float(v.mean()) if v.size else math.nan

    def se(self, metric: str) -> float | None:
        v = self.values(metric)
        if v.size < 2:
            return None
        return float(v.std(ddof=1) / math.sqrt(v.size))

    def summary(self) -> dict:
        return {m: {"mean": self.mean(m), "se": self.se(m)} for m in self.metrics()}

    def table(self) -> list[dict]:
        """One tidy row per metric, carrying the scenario parameters."""
        params = self.scenario.to_dict()
        return [
            {**params, "metric": m, "mean": self.mean(m), "se": self.se(m),
             "replicates": self.replicate_count, "failures": self.failures}
            for m in self.metrics()
        ]


def _summary_fit(phi, cfg: CcrConfig, summary_rank: int | None, main: CcrFit) -> CcrFit:
    if summary_rank is None or summary_rank == cfg.rank:
        return main
    return fit(phi, CcrConfig(summary_rank, cfg.s1, cfg.s2, cfg.tol, cfg.max_iterations))


def run_replicate(sc: SimScenario, cfg: CcrConfig, replicate: int, population: Population | None = None,
                  summary_rank: int | None = None) -> dict:
    """Metrics for one replicate; raises ``CcrError`` subclasses on failure.

    Binary designs report ``delta_i`` and ``eta_i`` from a fit at
    ``summary_rank`` (default ``cfg.rank``); selection rates and distances
    always come from the ``cfg.rank`` fit. Designs with three or more
    groups report ``rho_g`` (score correlation in group ``g``).
    """
    pop = population or build_population(sc)
    d = center_within_group(sample_dataset(sc, replicate, pop))
    if sc.n_groups == 2:
        phi = phi_tilde(d).phi
        main = fit(phi, cfg)
    else:
        main = fit_multigroup(build_stacked_phi(d), cfg)
    if not main.converged:
        raise DegenerateBasisError(f"replicate {replicate}: {main.message}")
    row = evaluate(main, pop.u_true, pop.v_true, pop.support_x, pop.support_y) if cfg.rank == sc.rank else {}
    if sc.n_groups == 2:
        summ = _summary_fit(phi, cfg, summary_rank, main)
        if not summ.converged:
            raise DegenerateBasisError(f"replicate {replicate}: {summ.message}")
        for i, (dl, et) in enumerate(zip(summ.deltas, correlation_differences(summ, d)), start=1):
            row[f"delta_{i}"] = float(dl)
            row[f"eta_{i}"] = float(et)
    else:
        row["delta_1"] = float(main.deltas[0])
        for g, rho in group_score_correlations(main, d).items():
            row[f"rho_{g}"] = rho
    return row


def _run_chunk(sc, cfg, reps, summary_rank):
    pop = build_population(sc)
    out = []
    for k in reps:
        try:
            out.append((k, run_replicate(sc, cfg, k, pop, summary_rank)))
        except CcrError as exc:
            out.append((k, exc))
    return out


def run_replications(sc: SimScenario, cfg: CcrConfig, replicates: int = 100, *, summary_rank: int | None = None,
                     n_jobs: int = 1) -> EvalReport:
    """Run ``replicates`` independent seeded replicates and aggregate.

    Results are merged in replicate order, so serial and parallel runs
    give identical reports.
    """
    if replicates < 1:
        raise ValidationError("replicates must be >= 1")
    reps = list(range(replicates))
    if n_jobs == 1:
        results = _run_chunk(sc, cfg, reps, summary_rank)
    else:
        chunks = [reps[i::n_jobs] for i in range(n_jobs) if reps[i::n_jobs]]
        parts = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_run_chunk)(sc, cfg, c, summary_rank) for c in chunks)
        results = sorted((item for part in parts for item in part), key=lambda kv: kv[0])
    rows, ids, failures = [], [], 0
    for k, res in results:
        if isinstance(res, Exception):
            failures += 1
            warnings.warn(f"replicate {k} failed: {res}", RuntimeWarning)
        else:
            rows.append(res)
            ids.append(k)
    return EvalReport(sc, rows, failures, ids)


def sparsity_sweep(sc: SimScenario, cfg: CcrConfig, s_values: Iterable[int], replicates: int = 50, *,
                   n_jobs: int = 1) -> list[dict]:
    """Mean leading covariance difference at ``s1 = s2 = s`` for each ``s``.

    Every ``s`` is evaluated on the same replicate datasets (the scenario
    seed fixes them), so the curve reflects the sparsity level rather than
    sampling noise between levels.
    """
    rows = []
    for s in s_values:
        s = int(s)
        if not 1 <= s <= min(sc.p1, sc.p2):
            raise ValidationError(f"sparsity {s} out of range")
        c = CcrConfig(min(cfg.rank, s), s, s, cfg.tol, cfg.max_iterations)
        rep = run_replications(sc, c, replicates, n_jobs=n_jobs)
        rows.append({**sc.to_dict(), "s": s, "mean_delta_1": rep.mean("delta_1"), "se_delta_1": rep.se("delta_1"),
                     "replicates": rep.replicate_count, "failures": rep.failures})
    return rows


def _bootstrap_rows(labels: np.ndarray, groups, rng: np.random.Generator) -> np.ndarray:
    rows = []
    for g in groups:
        idx = np.flatnonzero(labels == g)
        rows.append(rng.choice(idx, size=idx.size, replace=True))
    return np.concatenate(rows)


def resampling_ratios(sc: SimScenario, cfg: CcrConfig, scheme: str = "bootstrap", rounds: int = 200,
                      replicate: int = 0, dataset: GroupedDataset | None = None) -> dict:
    """Per-variable selection frequency under bootstrap or LTO resampling.

    Parameters
    ----------
    scheme : {"bootstrap", "lto"}
        ``bootstrap`` resamples rows with replacement inside each group
        ``rounds`` times; ``lto`` enumerates all ``n1 * n2`` leave-two-out
        splits and ignores ``rounds``.
    dataset : GroupedDataset, optional
        Use this data instead of sampling replicate ``replicate`` of ``sc``.

    Returns
    -------
    dict with ``freq_x``, ``freq_y`` (arrays in [0, 1]), ``reference_x`` /
    ``reference_y`` (``s / p``, the rate of a uniformly random pick),
    ``rounds_used`` and ``rounds_skipped``.
    """
    d = dataset if dataset is not None else sample_dataset(sc, replicate)
    if len(d.groups) != 2:
        raise ValidationError("resampling_ratios needs binary groups")
    cfg.check_dims(d.p1, d.p2)
    count_x, count_y = np.zeros(d.p1), np.zeros(d.p2)
    used = skipped = 0

    def tally(sub: GroupedDataset):
        nonlocal used, skipped
        dc = center_within_group(sub)
        for g in dc.groups:
            xg, yg = dc.group_block(g)
            if not (np.any(xg) and np.any(yg)):
                skipped += 1
                warnings.warn("degenerate resample (zero within-group variance) skipped", RuntimeWarning)
                return
        res = fit(phi_tilde(dc).phi, cfg)
        if not res.converged:
            skipped += 1
            warnings.warn(f"resample skipped: {res.message}", RuntimeWarning)
            return
        count_x[res.selected_x] += 1
        count_y[res.selected_y] += 1
        used += 1

    if scheme == "bootstrap":
        for b in range(rounds):
            rng = np.random.default_rng(np.random.SeedSequence(sc.seed, spawn_key=(replicate, BOOT_KEY, b)))
            tally(d.subset(_bootstrap_rows(d.labels, d.groups, rng)))
    elif scheme == "lto":
        g1, g2 = d.groups
        i1, i2 = np.flatnonzero(d.labels == g1), np.flatnonzero(d.labels == g2)
        keep = np.ones(d.n, dtype=bool)
        for i in i1:
            for j in i2:
                keep[:] = True
                keep[[i, j]] = False
                tally(d.subset(np.flatnonzero(keep)))
    else:
        raise ValidationError(f"unknown resampling scheme {scheme!r}")
    denom = max(used, 1)
    return {
        "scheme": scheme,
        "freq_x": count_x / denom,
        "freq_y": count_y / denom,
        "reference_x": cfg.s1 / d.p1,
        "reference_y": cfg.s2 / d.p2,
        "rounds_used": used,
        "rounds_skipped": skipped,
    }


def _preset(**kw):
    return lambda **over: SimScenario(**{**kw, **over})


# Named designs; call with keyword overrides, e.g. PRESETS["rank1_base"](group_sizes=(20, 20)).
PRESETS = {
    "rank1_base": _preset(name="rank1_base"),
    "rank2_base": _preset(name="rank2_base", rank=2, rhos=((0.9, 0.7), (-0.9, -0.7))),
    "weak_signal": _preset(name="weak_signal", c1=0.5, group_sizes=(20, 20)),
    "three_groups": _preset(name="three_groups", rhos=(0.9, 0.1, -0.9), group_sizes=(200, 200, 200)),
    "strong_small": _preset(name="strong_small", c1=10.0, group_sizes=(10, 11)),
    "ic_medium": _preset(name="ic_medium", p1=15, p2=15, group_sizes=(50, 50)),
    "resampling": _preset(name="resampling", p1=15, p2=18, group_sizes=(20, 20)),
    "sweep_s3": _preset(name="sweep_s3", group_sizes=(11, 10)),
    "sweep_s10": _preset(name="sweep_s10", s1_true=10, s2_true=10, group_sizes=(11, 10)),
}
