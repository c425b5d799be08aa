"""Command-line entry point: ``ccr <command> [options]``.

Commands
--------
fit       sparse fit of a dataset at fixed ``(rank, s1, s2)``
select    sequential permutation choice of ``(s1, s2)`` for a dataset
ic        information-criterion surface for a dataset
simulate  replicate a synthetic scenario and summarize the metrics
sweep     mean leading covariance difference across sparsity levels
resample  per-variable selection frequencies under bootstrap or LTO

The data-driven commands read a CSV file (``--input`` with the column
options) or one replicate of a synthetic scenario (``--scenario``).

Options may also come from a JSON file given with ``--config``; its keys are
the long option names with dashes replaced by underscores. Options given
on the command line win over the file.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O error.
Failures print a JSON error object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
import warnings

import numpy as np

from . import __version__
from .data import GroupedDataset, center_within_group, phi_tilde
from .errors import CcrError, ConvergenceError, ValidationError
from .estimator import CcrConfig, correlation_differences, fit
from .schemas import SCHEMA_VERSION
from .selection import SpssConfig, ic_surface, spss_select
from .simulation import PRESETS, SimScenario, resampling_ratios, run_replications, sample_dataset, sparsity_sweep

__all__ = ["main", "load_csv", "write_csv", "build_parser", "EXIT_OK", "EXIT_VALIDATION", "EXIT_NUMERICAL", "EXIT_IO"]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

COMMANDS = ("fit", "select", "ic", "simulate", "sweep", "resample")
DATA_COMMANDS = ("fit", "select", "ic")

# option name -> default; None means "not set"
DEFAULTS = {
    "input": None,
    "x_cols": None,
    "y_cols": None,
    "group_col": None,
    "group_order": None,
    "scenario": None,
    "rank": None,
    "s1": None,
    "s2": None,
    "tol": 1e-11,
    "max_iter": 1000,
    "perms": 100_000,
    "alpha": 0.05,
    "statistic": "lto",
    "seed": None,
    "replicates": 100,
    "summary_rank": None,
    "s_values": None,
    "scheme": "bootstrap",
    "rounds": 200,
    "replicate": 0,
    "threads": None,
    "out": None,
    "format": "json",
}


class CliIOError(CcrError):
    hint = "check that the path exists and is readable or writable"


def _split_names(text) -> list[str]:
    if isinstance(text, (list, tuple)):
        return [str(t) for t in text]
    return [t.strip() for t in str(text).split(",") if t.strip()]


def load_csv(path, x_columns, y_columns, group_column, group_order=None) -> GroupedDataset:
    """Read a UTF-8 CSV with a header row into a :class:`GroupedDataset`.

    Parameters
    ----------
    path : str or path-like
    x_columns, y_columns : sequence of str or comma-separated str
        Column names of the two variable blocks, in the order wanted.
    group_column : str
        Column holding the group labels (kept as strings).
    group_order : sequence of str, optional
        Declared labels; the first is "group 1". The file must contain
        exactly these labels.

    Every problem in the file is collected before raising, so a single
    ``ValidationError`` lists all offending rows (1-based, header = row 1)
    and columns.
    """
    x_columns, y_columns = _split_names(x_columns), _split_names(y_columns)
    if not x_columns or not y_columns:
        raise ValidationError("both --x-cols and --y-cols need at least one column name")
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise CliIOError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ValidationError(f"{path} is empty; a header row is required")
    header = [h.strip() for h in rows[0]]
    wanted = x_columns + y_columns + [group_column]
    missing = [c for c in wanted if c not in header]
    if missing:
        raise ValidationError(f"columns not found in {path}: {missing}", hint=f"available columns: {header}")
    dupes = sorted({c for c in x_columns + y_columns if (x_columns + y_columns).count(c) > 1})
    if dupes:
        raise ValidationError(f"columns listed more than once: {dupes}")
    col = {name: header.index(name) for name in wanted}
    problems: list[str] = []
    xs, ys, labels = [], [], []
    for lineno, raw in enumerate(rows[1:], start=2):
        if not any(cell.strip() for cell in raw):
            continue
        vals = {}
        for name in wanted:
            j = col[name]
            cell = raw[j].strip() if j < len(raw) else ""
            if cell == "":
                problems.append(f"row {lineno}, column {name!r}: missing value")
                continue
            if name == group_column:
                vals[name] = cell
                continue
            try:
                v = float(cell)
            except ValueError:
                problems.append(f"row {lineno}, column {name!r}: non-numeric value {cell!r}")
                continue
            if not math.isfinite(v):
                problems.append(f"row {lineno}, column {name!r}: non-finite value {cell!r}")
                continue
            vals[name] = v
        if len(vals) == len(wanted):
            xs.append([vals[c] for c in x_columns])
            ys.append([vals[c] for c in y_columns])
            labels.append(vals[group_column])
    if problems:
        raise ValidationError(f"{path}: {len(problems)} invalid cell(s): " + "; ".join(problems),
                              hint="fill or drop the listed rows")
    if not labels:
        raise ValidationError(f"{path} has no data rows")
    found = sorted(set(labels))
    if group_order:
        order = _split_names(group_order)
        if sorted(order) != found:
            raise ValidationError(f"--group-order {order} does not match the labels in the file {found}")
    else:
        order = found
    counts = {g: labels.count(g) for g in order}
    small = [g for g, c in counts.items() if c < 2]
    if small:
        raise ValidationError(f"groups with a single member: {small}", hint="each group needs at least two rows")
    return GroupedDataset(np.array(xs, dtype=float), np.array(ys, dtype=float), np.array(labels, dtype=object),
                          tuple(x_columns), tuple(y_columns), group_order=tuple(order))


def write_csv(d: GroupedDataset, path, group_column: str = "group") -> None:
    """Write a dataset as CSV with round-trip exact floats (``repr``)."""
    x_names = d.x_names or tuple(f"x{i + 1}" for i in range(d.p1))
    y_names = d.y_names or tuple(f"y{i + 1}" for i in range(d.p2))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*x_names, *y_names, group_column])
        for xr, yr, g in zip(d.x, d.y, d.labels):
            w.writerow([*(repr(float(v)) for v in xr), *(repr(float(v)) for v in yr), str(g)])


# ---------------------------------------------------------------- options


class _Parser(argparse.ArgumentParser):
    """Argument parser that raises instead of exiting on bad input."""

    def error(self, message):
        raise ValidationError(f"command line: {message}", hint="run `ccr <command> --help`")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    g = common.add_argument_group("input")
    g.add_argument("--config", help="JSON file of option values (command-line options win)")
    g.add_argument("--input", help="CSV file with a header row")
    g.add_argument("--x-cols", dest="x_cols", help="comma-separated X column names")
    g.add_argument("--y-cols", dest="y_cols", help="comma-separated Y column names")
    g.add_argument("--group-col", dest="group_col", help="group label column")
    g.add_argument("--group-order", dest="group_order", help="labels in order, first is group 1 (e.g. a,b)")
    g.add_argument("--scenario", help="scenario JSON file or a preset name: " + ", ".join(PRESETS))
    m = common.add_argument_group("model")
    m.add_argument("--rank", type=int)
    m.add_argument("--s1", type=int)
    m.add_argument("--s2", type=int)
    m.add_argument("--tol", type=float, help="convergence tolerance (default 1e-11)")
    m.add_argument("--max-iter", dest="max_iter", type=int, help="iteration cap (default 1000)")
    m.add_argument("--perms", type=int, help="sign-flip permutations (default 100000)")
    m.add_argument("--alpha", type=float, help="significance level (default 0.05)")
    m.add_argument("--statistic", choices=("lto", "jackknife"), help="SPSS test statistic (default lto)")
    m.add_argument("--seed", type=int, help="random seed (default 0, or the scenario seed for scenario commands)")
    s = common.add_argument_group("simulation")
    s.add_argument("--replicates", type=int, help="Monte Carlo replicates (default 100)")
    s.add_argument("--summary-rank", dest="summary_rank", type=int, help="rank of the fit reporting delta/eta")
    s.add_argument("--s-values", dest="s_values", help="comma-separated sparsity levels for sweep")
    s.add_argument("--scheme", choices=("bootstrap", "lto"), help="resampling scheme (default bootstrap)")
    s.add_argument("--rounds", type=int, help="bootstrap rounds (default 200)")
    s.add_argument("--replicate", type=int, help="replicate dataset used when fit, select, ic or resample read a scenario (default 0)")
    o = common.add_argument_group("output")
    o.add_argument("--threads", type=int, help="parallel workers (default: all cores)")
    o.add_argument("--out", help="output file (default stdout)")
    o.add_argument("--format", choices=("json", "csv"), help="report format (default json)")

    parser = _Parser(prog="ccr", description="Sparse estimation of cross-covariance differences.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "fit": "fit sparse directions at fixed (rank, s1, s2)",
        "select": "choose (s1, s2) by sequential sign-flip permutation tests",
        "ic": "information criterion over all (s1, s2)",
        "simulate": "replicate a synthetic scenario",
        "sweep": "mean leading covariance difference across sparsity levels",
        "resample": "selection frequencies under bootstrap or leave-two-out",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], argument_default=argparse.SUPPRESS)
    return parser


def resolve_options(argv) -> tuple[str, dict]:
    """Parse ``argv`` and merge with ``--config`` and the defaults."""
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    opts = dict(DEFAULTS)
    cfg_path = ns.pop("config", None)
    if cfg_path is not None:
        try:
            with open(cfg_path, encoding="utf-8") as fh:
                file_opts = json.load(fh)
        except OSError as exc:
            raise CliIOError(f"cannot read config {cfg_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config {cfg_path} is not valid JSON: {exc}") from exc
        if not isinstance(file_opts, dict):
            raise ValidationError(f"config {cfg_path} must hold a JSON object")
        file_opts = {k.replace("-", "_"): v for k, v in file_opts.items()}
        file_opts.pop("command", None)
        unknown = sorted(set(file_opts) - set(DEFAULTS))
        if unknown:
            raise ValidationError(f"unknown config keys: {unknown}", hint=f"known keys: {sorted(DEFAULTS)}")
        opts.update(file_opts)
    opts.update(ns)
    _validate(command, opts)
    return command, opts


def _validate(command: str, o: dict) -> None:
    if (command in DATA_COMMANDS and o["scenario"] is None) or (command == "resample" and o["input"] is not None):
        need = [k for k in ("input", "x_cols", "y_cols", "group_col") if o[k] is None]
        if need:
            missing = ", --".join(n.replace("_", "-") for n in need)
            hint = "or give --scenario to use a synthetic dataset" if command in DATA_COMMANDS else None
            raise ValidationError(f"`{command}` on a CSV needs --{missing}", hint=hint)
    if command in ("simulate", "sweep") or (command == "resample" and o["input"] is None):
        if o["scenario"] is None:
            raise ValidationError(f"`{command}` needs --scenario (a JSON file or preset name)")
    if command == "fit" and (o["s1"] is None or o["s2"] is None):
        raise ValidationError("`fit` needs --s1 and --s2")
    if command == "resample" and o["input"] is not None and (o["s1"] is None or o["s2"] is None):
        raise ValidationError("`resample` on a CSV needs --s1 and --s2")
    for key in ("rank", "s1", "s2", "replicates", "rounds", "max_iter", "threads", "summary_rank"):
        if o[key] is not None and (not isinstance(o[key], int) or o[key] < 1):
            raise ValidationError(f"--{key.replace('_', '-')} must be a positive integer, got {o[key]!r}")
    if o["seed"] is not None and (not isinstance(o["seed"], int) or o["seed"] < 0):
        raise ValidationError("--seed must be a non-negative integer")
    if o["replicate"] is not None and (not isinstance(o["replicate"], int) or o["replicate"] < 0):
        raise ValidationError("--replicate must be a non-negative integer")
    if not (isinstance(o["tol"], (int, float)) and o["tol"] > 0):
        raise ValidationError(f"--tol must be positive, got {o['tol']!r}")
    if o["format"] not in ("json", "csv"):
        raise ValidationError(f"--format must be json or csv, got {o['format']!r}")


def _threads(o: dict) -> int:
    return o["threads"] if o["threads"] is not None else max(1, os.cpu_count() or 1)


def _scenario(o: dict) -> SimScenario:
    ref = o["scenario"]
    if isinstance(ref, dict):
        sc = SimScenario.from_dict(ref)
    elif os.path.exists(str(ref)):
        try:
            sc = SimScenario.from_json(ref)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"scenario {ref} is not valid JSON: {exc}") from exc
        except TypeError as exc:
            raise ValidationError(f"scenario {ref}: {exc}") from exc
    elif ref in PRESETS:
        sc = PRESETS[ref]()
    else:
        raise CliIOError(f"scenario {ref!r} is neither a readable file nor a preset",
                         hint=f"presets: {', '.join(PRESETS)}")
    if o["seed"] is not None:
        sc = sc.with_(seed=o["seed"])
    return sc


def _dataset(o: dict) -> GroupedDataset:
    """The CSV given by --input, else replicate --replicate of --scenario."""
    if o["input"] is None and o["scenario"] is not None:
        d = sample_dataset(_scenario(o), o["replicate"])
        return dataclasses.replace(d, x_names=tuple(f"x{i + 1}" for i in range(d.p1)),
                                   y_names=tuple(f"y{i + 1}" for i in range(d.p2)))
    return load_csv(o["input"], o["x_cols"], o["y_cols"], o["group_col"], o["group_order"])


def _ccr_config(o: dict, rank_default: int, s_default=None) -> CcrConfig:
    s1 = o["s1"] if o["s1"] is not None else (s_default[0] if s_default else None)
    s2 = o["s2"] if o["s2"] is not None else (s_default[1] if s_default else None)
    return CcrConfig(o["rank"] or rank_default, s1, s2, float(o["tol"]), o["max_iter"])


# ---------------------------------------------------------------- commands


def _finite(v):
    """JSON-safe scalar: non-finite floats become None."""
    if v is None:
        return None
    if isinstance(v, (np.integer, int)) and not isinstance(v, bool):
        return int(v)
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else None
    return v


def _grid(a: np.ndarray) -> list:
    return [[_finite(v) for v in row] for row in np.asarray(a, dtype=float)]


def _header(command: str, o: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command}


def cmd_fit(o: dict) -> dict:
    d = center_within_group(_dataset(o))
    cfg = _ccr_config(o, 1)
    res = fit(phi_tilde(d), cfg)
    if not res.converged:
        raise ConvergenceError(f"fit did not converge: {res.message}")
    etas = correlation_differences(res, d)
    return {
        **_header("fit", o),
        "config": {"rank": cfg.rank, "s1": cfg.s1, "s2": cfg.s2, "tol": cfg.tol, "max_iterations": cfg.max_iterations},
        "groups": {"order": [str(g) for g in d.groups], "sizes": [d.group_size(g) for g in d.groups]},
        "selected_x": [d.x_names[i] for i in res.selected_x],
        "selected_y": [d.y_names[i] for i in res.selected_y],
        "loadings_x": {name: [float(v) for v in row] for name, row in zip(d.x_names, res.u_hat)},
        "loadings_y": {name: [float(v) for v in row] for name, row in zip(d.y_names, res.v_hat)},
        "deltas": [float(v) for v in res.deltas],
        "etas": [float(v) for v in etas],
        "iterations": res.iterations,
        "converged": res.converged,
        "trace": [float(v) for v in res.trace],
    }


def cmd_select(o: dict) -> dict:
    d = _dataset(o)
    rank = o["rank"] or 1
    cfg = SpssConfig(o["perms"], float(o["alpha"]), o["seed"] or 0, float(o["tol"]), o["max_iter"], o["statistic"])
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        res = spss_select(d, rank, cfg, n_jobs=_threads(o))
    return {
        **_header("select", o),
        "config": {"rank": rank, "permutations": cfg.permutations, "alpha": cfg.alpha, "seed": cfg.seed,
                   "statistic": cfg.statistic, "tol": cfg.tol},
        "selected": {"s1": res.selected[0], "s2": res.selected[1]},
        "selected_x_count": res.selected[0],
        "selected_y_count": res.selected[1],
        "pvalues_s1": _grid(res.pvalues_s1),
        "pvalues_s2": _grid(res.pvalues_s2),
        "lto_split_count": res.lto_split_count,
        "excluded_fits": res.excluded_fits,
        "warnings": list(res.warnings),
        "_rows": res.tidy(),
    }


def cmd_ic(o: dict) -> dict:
    d = _dataset(o)
    rank = o["rank"] or 1
    surf = ic_surface(d, rank, tol=float(o["tol"]), max_iterations=o["max_iter"])
    rows = [{"s1": i + 1, "s2": j + 1, "ic": _finite(v)} for (i, j), v in np.ndenumerate(surf.values)]
    return {
        **_header("ic", o),
        "config": {"rank": rank, "tol": float(o["tol"])},
        "n": surf.n,
        "argmin": {"s1": surf.argmin[0], "s2": surf.argmin[1]},
        "values": _grid(surf.values),
        "norms": _grid(surf.norms),
        "_rows": rows,
    }


def cmd_simulate(o: dict) -> dict:
    sc = _scenario(o)
    cfg = _ccr_config(o, sc.rank, (sc.s1_true, sc.s2_true))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rep = run_replications(sc, cfg, o["replicates"], summary_rank=o["summary_rank"], n_jobs=_threads(o))
    rows = [{k: _finite(v) for k, v in row.items()} for row in rep.table()]
    for row in rows:
        row["rhos"] = json.dumps(row["rhos"])
        row["group_sizes"] = json.dumps(row["group_sizes"])
    return {
        **_header("simulate", o),
        "scenario": sc.to_dict(),
        "config": {"rank": cfg.rank, "s1": cfg.s1, "s2": cfg.s2, "tol": cfg.tol},
        "replicates": rep.replicate_count,
        "failures": rep.failures,
        "summary": {m: {"mean": _finite(v["mean"]), "se": _finite(v["se"])} for m, v in rep.summary().items()},
        "_rows": rows,
    }


def cmd_sweep(o: dict) -> dict:
    sc = _scenario(o)
    if o["s_values"] is None:
        s_values = list(range(1, min(sc.p1, sc.p2, 10) + 1))
    else:
        try:
            s_values = [int(v) for v in _split_names(o["s_values"])]
        except ValueError as exc:
            raise ValidationError(f"--s-values must be integers: {exc}") from exc
    rank = o["rank"] or 1
    cfg = CcrConfig(rank, rank, rank, float(o["tol"]), o["max_iter"])
    replicates = o["replicates"]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rows = sparsity_sweep(sc, cfg, s_values, replicates, n_jobs=_threads(o))
    out_rows = [{"s": r["s"], "mean_delta_1": _finite(r["mean_delta_1"]), "se_delta_1": _finite(r["se_delta_1"]),
                 "replicates": r["replicates"], "failures": r["failures"]} for r in rows]
    return {**_header("sweep", o), "scenario": sc.to_dict(), "rows": out_rows, "_rows": out_rows}


def cmd_resample(o: dict) -> dict:
    if o["input"] is not None:
        d = _dataset(o)
        sc = SimScenario(p1=d.p1, p2=d.p2, s1_true=1, s2_true=1, group_sizes=(2, 2), seed=o["seed"] or 0)
        cfg = _ccr_config(o, 1)
        x_names, y_names = d.x_names, d.y_names
        source = {"input": os.path.basename(str(o["input"]))}
    else:
        sc = _scenario(o)
        d = sample_dataset(sc, o["replicate"])
        cfg = _ccr_config(o, sc.rank, (sc.s1_true, sc.s2_true))
        x_names = tuple(f"x{i + 1}" for i in range(sc.p1))
        y_names = tuple(f"y{i + 1}" for i in range(sc.p2))
        source = {"scenario": sc.to_dict(), "replicate": o["replicate"]}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = resampling_ratios(sc, cfg, o["scheme"], o["rounds"], o["replicate"], dataset=d)
    rows = ([{"block": "x", "variable": n, "frequency": float(f)} for n, f in zip(x_names, res["freq_x"])]
            + [{"block": "y", "variable": n, "frequency": float(f)} for n, f in zip(y_names, res["freq_y"])])
    return {
        **_header("resample", o),
        "source": source,
        "config": {"rank": cfg.rank, "s1": cfg.s1, "s2": cfg.s2, "scheme": o["scheme"], "rounds": o["rounds"]},
        "frequency_x": {n: float(f) for n, f in zip(x_names, res["freq_x"])},
        "frequency_y": {n: float(f) for n, f in zip(y_names, res["freq_y"])},
        "reference_x": res["reference_x"],
        "reference_y": res["reference_y"],
        "rounds_used": res["rounds_used"],
        "rounds_skipped": res["rounds_skipped"],
        "_rows": rows,
    }


HANDLERS = {"fit": cmd_fit, "select": cmd_select, "ic": cmd_ic, "simulate": cmd_simulate,
            "sweep": cmd_sweep, "resample": cmd_resample}


# ---------------------------------------------------------------- output


def _csv_rows(report: dict) -> list[dict]:
    if "_rows" in report:
        return report["_rows"]
    # fit: one row per variable
    rows = []
    for block, sel, loads in (("x", report["selected_x"], report["loadings_x"]),
                              ("y", report["selected_y"], report["loadings_y"])):
        for name, vals in loads.items():
            row = {"block": block, "variable": name, "selected": name in sel}
            row.update({f"loading_{i + 1}": v for i, v in enumerate(vals)})
            rows.append(row)
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(report: dict, fmt: str) -> str:
    """Serialize a report. JSON omits the internal ``_rows`` table."""
    if fmt == "json":
        public = {k: v for k, v in report.items() if not k.startswith("_")}
        return json.dumps(public, indent=2, allow_nan=False) + "\n"
    rows = _csv_rows(report)
    buf = io.StringIO()
    fields: list[str] = []
    for r in rows:
        fields.extend(k for k in r if k not in fields)
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(r.get(k)) for k in fields})
    return buf.getvalue()


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, CliIOError) or isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, ArithmeticError):
        return EXIT_NUMERICAL
    if isinstance(exc, (ValueError, TypeError, KeyError, CcrError)):
        return EXIT_VALIDATION
    return EXIT_NUMERICAL


def _origin(exc: BaseException) -> str:
    """Module (within this package) of the innermost frame that raised."""
    origin = "python"
    tb = exc.__traceback__
    while tb is not None:
        mod = tb.tb_frame.f_globals.get("__name__", "")
        if mod.startswith("ccrmodel."):
            origin = mod.split(".", 1)[1]
        tb = tb.tb_next
    return origin


def error_object(exc: BaseException, command: str | None) -> dict:
    code = _exit_code(exc)
    hint = getattr(exc, "hint", "") or ""
    message = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
    return {
        "schema_version": SCHEMA_VERSION,
        "error": {
            "type": type(exc).__name__,
            "origin": _origin(exc),
            "command": command,
            "message": str(message),
            "hint": hint,
            "exit_code": code,
        },
    }


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    command = next((a for a in argv if a in COMMANDS), None)
    try:
        command, opts = resolve_options(argv)
        report = HANDLERS[command](opts)
        text = render(report, opts["format"])
        if opts["out"]:
            try:
                with open(opts["out"], "w", encoding="utf-8", newline="") as fh:
                    fh.write(text)
            except OSError as exc:
                raise CliIOError(f"cannot write {opts['out']}: {exc}") from exc
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except (CcrError, OSError, ValueError, TypeError, KeyError, ArithmeticError) as exc:
        err = error_object(exc, command)
        sys.stderr.write(json.dumps(err, indent=2) + "\n")
        return err["error"]["exit_code"]


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
