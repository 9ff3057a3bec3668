"""Batch front end: flat key-value config in, JSON/CSV artifacts out.

Exit codes: 0 converged, 2 honest non-convergence (so sweep scripts can tell
the two apart), 1 on configuration or computational error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .assembly import RefinementSchedule, TraceResult, trace
from .errors import ConfigError, FPTraceError
from .onedim import GridSpec
from .problems import Problem, builtin, problem_from_expressions
from .spaces import estimate_lipschitz

_DEFAULTS = {
    "problem": "",
    "expr": "",
    "x_low": 0.0,
    "x_high": 1.0,
    "x_samples": 129,
    "y_low": "0.0",
    "y_high": "1.0",
    "radius_x": 0.25,
    "radius_y": 0.25,
    "schedule_factor": 0.5,
    "max_iters": 6,
    "stability_eps": 0.05,
    "s_cells": 32,
    "y_cells": "8",
    "inflation": 0.0,
    "max_refines": 2,
    "samples_per_rect": 3,
    "walk_start": 0,
    "seed": 0,
    "lipschitz_samples": 4000,
    "out": "runout",
    "threads": 1,
}

_INT_KEYS = {"x_samples", "max_iters", "s_cells", "max_refines",
             "samples_per_rect", "walk_start", "seed", "lipschitz_samples",
             "threads"}
_FLOAT_KEYS = {"x_low", "x_high", "radius_x", "radius_y", "schedule_factor",
               "stability_eps", "inflation"}


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: dict(_DEFAULTS))

    def __getitem__(self, key):
        return self.values[key]

    def validate(self) -> None:
        v = self.values
        if not v["problem"] and not v["expr"]:
            raise ConfigError("one of 'problem' or 'expr' is required")
        if not 0.0 < v["schedule_factor"] < 1.0:
            raise ConfigError(
                f"schedule_factor: must lie in (0, 1), got {v['schedule_factor']}")
        for key in ("radius_x", "radius_y", "stability_eps"):
            if v[key] <= 0:
                raise ConfigError(f"{key}: must be positive, got {v[key]}")
        for key in ("max_iters", "x_samples", "s_cells", "samples_per_rect",
                    "lipschitz_samples", "threads"):
            if v[key] < 1:
                raise ConfigError(f"{key}: must be >= 1, got {v[key]}")
        if v["inflation"] < 0 or v["max_refines"] < 0 or v["seed"] < 0:
            raise ConfigError("inflation, max_refines and seed must be >= 0")


def parse_config(path: str | Path) -> RunConfig:
    """Parse a flat key = value file; unknown keys are errors."""
    cfg = RunConfig()
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            if key in _INT_KEYS:
                cfg.values[key] = int(value)
            elif key in _FLOAT_KEYS:
                cfg.values[key] = float(value)
            else:
                cfg.values[key] = value
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from None
    return cfg


def _resolve_problem(cfg: RunConfig) -> Problem:
    if cfg["problem"]:
        return builtin(cfg["problem"])
    exprs = [e.strip() for e in cfg["expr"].split(";") if e.strip()]
    y_low = [float(t) for t in str(cfg["y_low"]).split(",")]
    y_high = [float(t) for t in str(cfg["y_high"]).split(",")]
    return problem_from_expressions(exprs, cfg["x_low"], cfg["x_high"],
                                    cfg["x_samples"], y_low, y_high)


def _grid_from_config(cfg: RunConfig) -> GridSpec:
    y_cells = tuple(int(t) for t in str(cfg["y_cells"]).split(","))
    # tol is recomputed per iteration; the placeholder only has to validate
    return GridSpec(s_cells=cfg["s_cells"], y_cells=y_cells, tol=1.0,
                    inflation=cfg["inflation"])


def _write_outputs(out_dir: Path, cfg: RunConfig, problem: Problem,
                   result: TraceResult) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = result.summary_dict()
    summary["problem"] = problem.name
    summary["seed"] = cfg["seed"]
    summary["eval_count"] = problem.map.eval_count
    summary["lipschitz_estimate"] = problem.map.lipschitz_estimate
    (out_dir / "summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n")

    iter_dir = out_dir / "iterations"
    iter_dir.mkdir(exist_ok=True)
    for k, (wk, comp, cover_x, cover_y, union) in enumerate(result.iterations):
        record = {
            "walk": wk.to_list(),
            "cover_x": cover_x.to_dict(),
            "cover_y": cover_y.to_dict(),
            "component_rle": comp.rle(),
            "projection_complete": comp.projection_complete,
            "grid": {"s_cells": comp.grid.s_cells,
                     "y_cells": list(comp.grid.y_cells),
                     "tol": comp.grid.tol,
                     "inflation": comp.grid.inflation},
            "rects": union.to_dict() if union is not None else None,
        }
        (iter_dir / f"{k:03d}.json").write_text(
            json.dumps(record, sort_keys=True, indent=2) + "\n")

    d = problem.space_x.dim
    m = problem.space_y.dims
    header = (["iter"] + [f"x{j}" for j in range(d)] + [f"y{j}" for j in range(m)]
              + ["radius_x", "radius_y"])
    with (out_dir / "component.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for k, (wk, comp, cover_x, cover_y, union) in enumerate(result.iterations):
            if union is None:
                continue
            for ex, ey in union.rects:
                row = ([k] + [f"{v:.12g}" for v in cover_x.centers[ex]]
                       + [f"{v:.12g}" for v in cover_y.centers[ey]]
                       + [f"{cover_x.radii[ex]:.12g}", f"{cover_y.radii[ey]:.12g}"])
                writer.writerow(row)


def run(cfg: RunConfig) -> int:
    """Execute one trace and write summary.json, iterations/, component.csv."""
    cfg.validate()
    problem = _resolve_problem(cfg)
    estimate_lipschitz(problem.map, cfg["lipschitz_samples"], seed=cfg["seed"])
    schedule = RefinementSchedule(radius_x=cfg["radius_x"],
                                  radius_y=cfg["radius_y"],
                                  factor=cfg["schedule_factor"])
    result = trace(problem.map, schedule, _grid_from_config(cfg),
                   max_iters=cfg["max_iters"],
                   stability_eps=cfg["stability_eps"],
                   walk_start=cfg["walk_start"],
                   max_refines=cfg["max_refines"],
                   samples_per_rect=cfg["samples_per_rect"])
    _write_outputs(Path(cfg["out"]), cfg, problem, result)
    return 0 if result.converged else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fptrace",
        description="Trace a connected approximate fixed-point set of a "
                    "parametric map across its whole parameter space.")
    parser.add_argument("--config", help="flat key = value run configuration")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, help="random seed (overrides config)")
    parser.add_argument("--threads", type=int, help="worker threads (overrides config)")
    parser.add_argument("--problem", help="built-in problem name (overrides config)")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config) if args.config else RunConfig()
        if args.out is not None:
            cfg.values["out"] = args.out
        if args.seed is not None:
            cfg.values["seed"] = args.seed
        if args.threads is not None:
            cfg.values["threads"] = args.threads
        if args.problem is not None:
            cfg.values["problem"] = args.problem
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except FPTraceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
