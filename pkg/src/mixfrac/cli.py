"""Batch front end: ``mixfrac run config.json [--force] [--out DIR]``.

Exit codes: 0 success, 1 configuration error, 2 hypothesis or precondition
violation, 3 numerical failure. Every error is also written to stderr as a
single JSON line.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from contextlib import nullcontext
from pathlib import Path

import jsonschema
import numpy as np

from .eigensolver import solve_direct, solve_recursive_rayleigh
from .errors import (ConvergenceFailure, HypothesisViolation, IndefiniteForm, NonConvergence,
                     NotFound, PreconditionError, SingularSystem)
from .kernel import Grid
from .maxprinciple import strong_mp_check, verify_counterexample, weak_mp_trials
from .measure import DEFAULT_NODES_PER_PIECE, SignedMeasure, check_hypotheses
from .operator import assemble
from .plots import emit_plots

EXIT_OK, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_NUMERIC = 0, 1, 2, 3

_NUM = {"type": "number"}
_COMPONENT = {
    "oneOf": [
        {"type": "object", "additionalProperties": False, "required": ["kind", "s", "weight"],
         "properties": {"kind": {"const": "atom"}, "s": _NUM, "weight": _NUM}},
        {"type": "object", "additionalProperties": False, "required": ["kind", "s_lo", "s_hi", "coeff"],
         "properties": {"kind": {"const": "density"}, "s_lo": _NUM, "s_hi": _NUM, "coeff": _NUM}},
    ]
}
_TASK = {
    "oneOf": [
        {"type": "object", "additionalProperties": False, "required": ["task", "k"],
         "properties": {"task": {"const": "spectrum"},
                        "k": {"type": "integer", "minimum": 1},
                        "method": {"enum": ["both", "direct", "recursive"]},
                        "seed": {"type": "integer", "minimum": 0}}},
        {"type": "object", "additionalProperties": False, "required": ["task"],
         "properties": {"task": {"const": "maxprinciple"},
                        "trials": {"type": "integer", "minimum": 1},
                        "seed": {"type": "integer", "minimum": 0}}},
        {"type": "object", "additionalProperties": False, "required": ["task", "alpha", "s"],
         "properties": {"task": {"const": "counterexample"},
                        "alpha": {"type": "number", "exclusiveMinimum": 0},
                        "s": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                        "convention": {"enum": ["paper", "normalized"]},
                        "n": {"type": "integer", "minimum": 3}}},
    ]
}
CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["domain", "grid", "measure", "tasks"],
    "properties": {
        "domain": {"type": "object", "additionalProperties": False, "required": ["a", "b"],
                   "properties": {"a": _NUM, "b": _NUM}},
        "grid": {"type": "object", "additionalProperties": False, "required": ["n"],
                 "properties": {"n": {"type": "integer", "minimum": 2},
                                "nodes_per_piece": {"type": "integer", "minimum": 1}}},
        "measure": {"type": "object", "additionalProperties": False,
                    "properties": {"sbar": _NUM,
                                   "plus": {"type": "array", "items": _COMPONENT},
                                   "minus": {"type": "array", "items": _COMPONENT}}},
        "tasks": {"type": "array", "items": _TASK},
        "output": {"type": "object", "additionalProperties": False,
                   "properties": {"dir": {"type": "string"}, "emit_svg": {"type": "boolean"}}},
    },
}


class ConfigError(Exception):
    pass


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return format(float(v), ".17g")


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_json(path: Path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"schema violation at {where}: {exc.message}") from exc
    kinds = [t["task"] for t in cfg["tasks"]]
    if len(set(kinds)) != len(kinds):
        raise ConfigError("each task type may appear at most once")
    return cfg


def _build(cfg: dict):
    try:
        measure = SignedMeasure.from_dict(cfg["measure"])
        grid = Grid(float(cfg["domain"]["a"]), float(cfg["domain"]["b"]), cfg["grid"]["n"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    for task in cfg["tasks"]:
        if task["task"] == "spectrum" and task["k"] > grid.n:
            raise ConfigError(f"spectrum k={task['k']} exceeds the {grid.n} interior nodes")
    return measure, grid


def _run_spectrum(task, measure, grid, force, nodes_per_piece, out: Path, results):
    op = assemble(measure, grid, nodes_per_piece, force=force)
    k = task["k"]
    method = task.get("method", "both")
    direct = solve_direct(op, k) if method in ("both", "direct") else None
    recursive = (solve_recursive_rayleigh(op, k, seed=task.get("seed", 0))
                 if method in ("both", "recursive") else None)
    rows = []
    for i in range(k):
        ld = direct.lambdas[i] if direct else None
        lr = recursive.lambdas[i] if recursive else None
        gap = abs(ld - lr) / abs(ld) if direct and recursive else None
        rows.append((i + 1, ld, lr, gap))
    _write_csv(out / "eigenvalues.csv", ["k", "lambda_direct", "lambda_recursive", "rel_gap"], rows)
    spec = direct or recursive
    x = grid.x
    _write_csv(out / "eigenfunctions.csv", ["x"] + [f"e{i + 1}" for i in range(k)],
               [(x[j], *spec.vectors[j]) for j in range(grid.n)])
    results["spectrum"] = {"x": x, "vectors": spec.vectors, "lambdas": spec.lambdas}
    return {"k": k, "method": method, "lambda_1": float(spec.lambdas[0])}


def _run_maxprinciple(task, measure, grid, nodes_per_piece, out: Path, results):
    trials, seed = task.get("trials", 100), task.get("seed", 0)
    weak = weak_mp_trials(measure, grid, trials, seed, nodes_per_piece=nodes_per_piece)
    impulse = np.zeros(grid.n)
    impulse[grid.n // 2] = 1.0
    strong = strong_mp_check(measure, grid, impulse, nodes_per_piece=nodes_per_piece)
    _write_csv(out / "mp_report.csv",
               ["check", "trials", "seed", "min_solution_value", "violations", "passed"],
               [("weak", weak.trials, weak.seed, weak.min_solution_value, weak.violations,
                 weak.violations == 0),
                ("strong", 1, None, strong.min_value, int(not strong.passed), strong.passed)])
    results["maxprinciple"] = (weak, strong)
    return {"weak_violations": weak.violations, "weak_min": weak.min_solution_value,
            "strong_passed": strong.passed, "strong_min": strong.min_value}


def _run_counterexample(task, out: Path, results):
    report = verify_counterexample(task["alpha"], task["s"], task.get("n", 201),
                                   task.get("convention", "paper"))
    _write_csv(out / "counterexample.csv", ["x", "u_R", "residual"],
               zip(report.x, report.u, report.residual))
    results["counterexample"] = report
    return {"alpha": report.alpha, "s": report.s, "R0": report.R0,
            "convention": report.convention, "operator_alpha": report.operator_alpha,
            "grid_residual_min": report.grid_residual_min,
            "u_max_interior": report.u_max_interior,
            "closedform_oracle_dev": report.closedform_oracle_dev,
            "confirmed": report.confirmed}


def _thread_limit():
    value = os.environ.get("MIXFRAC_THREADS")
    if not value:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=max(1, int(value)))


def run(config_path, force: bool = False, out_dir=None) -> int:
    cfg = load_config(config_path)
    measure, grid = _build(cfg)
    if out_dir is not None:
        out = Path(out_dir)
    else:
        # relative output.dir is resolved against the config's directory
        out = Path(config_path).parent / cfg.get("output", {}).get("dir", "out")
    emit_svg = cfg.get("output", {}).get("emit_svg", False)
    nodes_per_piece = cfg["grid"].get("nodes_per_piece", DEFAULT_NODES_PER_PIECE)

    out.mkdir(parents=True, exist_ok=True)
    report = check_hypotheses(measure)
    _write_json(out / "hypotheses.json", report.to_dict())
    if not report.ok and not force:
        raise HypothesisViolation("measure violates the positivity/support hypotheses "
                                  "(rerun with --force to proceed)", report)

    results: dict = {}
    summary = {}
    with _thread_limit():
        for task in cfg["tasks"]:
            kind = task["task"]
            if kind == "spectrum":
                summary[kind] = _run_spectrum(task, measure, grid, force, nodes_per_piece, out, results)
            elif kind == "maxprinciple":
                summary[kind] = _run_maxprinciple(task, measure, grid, nodes_per_piece, out, results)
            else:
                summary[kind] = _run_counterexample(task, out, results)
        plots = emit_plots(results, out, emit_svg)
    summary["plots"] = [p.name for p in plots]
    _write_json(out / "summary.json", summary)
    return EXIT_OK


def _fail(kind: str, exc: Exception, code: int) -> int:
    print(json.dumps({"error": kind, "exit_code": code, "detail": str(exc)}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="mixfrac", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute the tasks of a JSON config")
    p_run.add_argument("config")
    p_run.add_argument("--force", action="store_true",
                       help="proceed even if the measure violates the structural hypotheses")
    p_run.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    args = parser.parse_args(argv)
    try:
        return run(args.config, force=args.force, out_dir=args.out)
    except ConfigError as exc:
        return _fail("ConfigError", exc, EXIT_CONFIG)
    except (HypothesisViolation, PreconditionError) as exc:
        return _fail(type(exc).__name__, exc, EXIT_HYPOTHESIS)
    except (IndefiniteForm, ConvergenceFailure, NonConvergence, SingularSystem, NotFound) as exc:
        return _fail(type(exc).__name__, exc, EXIT_NUMERIC)


if __name__ == "__main__":
    raise SystemExit(main())
