"""JSON Schemas (draft 2020-12) for the reports the CLI writes.

``SCHEMAS[command]`` describes a successful report and ``ERROR_SCHEMA``
the object printed on failure. ``python -m ccrmodel.schemas DIR`` writes
them to ``DIR/<command>.schema.json``.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

SCHEMA_VERSION = "1.0"

_num = {"type": "number"}
_num_or_null = {"type": ["number", "null"]}
_count = {"type": "integer", "minimum": 0}
_pos = {"type": "integer", "minimum": 1}
_names = {"type": "array", "items": {"type": "string"}}
_grid = {"type": "array", "items": {"type": "array", "items": _num_or_null}}
_loadings = {"type": "object", "additionalProperties": {"type": "array", "items": _num}}
_freqs = {"type": "object", "additionalProperties": {"type": "number", "minimum": 0, "maximum": 1}}
_scenario = {
    "type": "object",
    "required": ["p1", "p2", "s1_true", "s2_true", "rank", "rhos", "c1", "c2", "cov_family", "cov_param",
                 "group_sizes", "seed", "name"],
}


def _report(command: str, required: dict) -> dict:
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": f"ccr {command} report",
        "type": "object",
        "required": ["schema_version", "command", *required],
        "properties": {
            "schema_version": {"const": SCHEMA_VERSION},
            "command": {"const": command},
            **required,
        },
    }


SCHEMAS = {
    "fit": _report("fit", {
        "config": {"type": "object", "required": ["rank", "s1", "s2", "tol", "max_iterations"]},
        "groups": {"type": "object", "required": ["order", "sizes"]},
        "selected_x": _names,
        "selected_y": _names,
        "loadings_x": _loadings,
        "loadings_y": _loadings,
        "deltas": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "etas": {"type": "array", "items": {"type": "number", "minimum": -2, "maximum": 2}},
        "iterations": _pos,
        "converged": {"type": "boolean"},
        "trace": {"type": "array", "items": _num},
    }),
    "select": _report("select", {
        "config": {"type": "object", "required": ["rank", "permutations", "alpha", "seed", "statistic"]},
        "selected": {"type": "object", "required": ["s1", "s2"],
                     "properties": {"s1": _pos, "s2": _pos}},
        "pvalues_s1": _grid,
        "pvalues_s2": _grid,
        "lto_split_count": _pos,
        "excluded_fits": _count,
        "warnings": _names,
    }),
    "ic": _report("ic", {
        "config": {"type": "object", "required": ["rank"]},
        "n": _pos,
        "argmin": {"type": "object", "required": ["s1", "s2"], "properties": {"s1": _pos, "s2": _pos}},
        "values": _grid,
        "norms": _grid,
    }),
    "simulate": _report("simulate", {
        "scenario": _scenario,
        "config": {"type": "object", "required": ["rank", "s1", "s2"]},
        "replicates": _count,
        "failures": _count,
        "summary": {"type": "object", "additionalProperties": {
            "type": "object", "required": ["mean", "se"],
            "properties": {"mean": _num_or_null, "se": _num_or_null}}},
    }),
    "sweep": _report("sweep", {
        "scenario": _scenario,
        "rows": {"type": "array", "items": {
            "type": "object", "required": ["s", "mean_delta_1", "se_delta_1", "replicates", "failures"]}},
    }),
    "resample": _report("resample", {
        "source": {"type": "object"},
        "config": {"type": "object", "required": ["rank", "s1", "s2", "scheme"]},
        "frequency_x": _freqs,
        "frequency_y": _freqs,
        "rounds_used": _count,
        "rounds_skipped": _count,
    }),
}

ERROR_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ccr error object",
    "type": "object",
    "required": ["schema_version", "error"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "error": {
            "type": "object",
            "required": ["type", "origin", "command", "message", "hint", "exit_code"],
            "properties": {
                "type": {"type": "string"},
                "origin": {"type": "string"},
                "command": {"type": ["string", "null"]},
                "message": {"type": "string"},
                "hint": {"type": "string"},
                "exit_code": {"enum": [2, 3, 4]},
            },
        },
    },
}


def write_schemas(directory) -> list[Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, schema in {**SCHEMAS, "error": ERROR_SCHEMA}.items():
        p = out / f"{name}.schema.json"
        p.write_text(json.dumps(schema, indent=2) + "\n", encoding="utf-8")
        paths.append(p)
    return paths


if __name__ == "__main__":  # pragma: no cover
    for p in write_schemas(sys.argv[1] if len(sys.argv) > 1 else "schemas"):
        print(p)
