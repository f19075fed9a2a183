"""Batch command-line front door: solve, sweep, check, seed.

Exit codes: 0 converged / all checks pass, 1 configuration error,
2 iteration limit hit, 3 degenerate curve.
All outputs are deterministic functions of the config (no timestamps, fixed
float formatting), so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .constraints import free_mask, seed
from .curves import length, save_curve
from .errors import ConfigError, DegenerateCurveError, VarcurvesError
from .functionals import FunctionalSpec, el_residual, evaluate
from . import checks
from .optimize import minimize, multistart

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ITER_LIMIT = 2
EXIT_DEGENERATE = 3

_VERDICT_CODE = {"converged": EXIT_OK, "evaluated": EXIT_OK,
                 "iter_limit": EXIT_ITER_LIMIT, "degenerate": EXIT_DEGENERATE}


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args)
    if cfg.multistart:
        result = multistart(cfg.spec, cfg.constraint, cfg.seed_list(), cfg.options)
        payload = {
            "reports": [r.to_dict() for r in result.reports],
            "labels": list(result.labels),
            "sup_distance": result.sup_distance.tolist(),
            "h2_distance": result.h2_distance.tolist(),
            "clusters": [list(c) for c in result.clusters],
            "n_clusters": result.n_clusters,
        }
        _write_json(out / "multistart.json", payload)
        for rep, label in zip(result.reports, result.labels):
            save_curve(rep.minimizer, out / f"minimizer_{label.replace(',', '_')}.curve")
        return max(_VERDICT_CODE[r.verdict] for r in result.reports)
    (x0, _), = cfg.seed_list()
    report = minimize(cfg.spec, cfg.constraint, x0, cfg.options)
    _write_json(out / "report.json", report.to_dict())
    save_curve(report.minimizer, out / "minimizer.curve")
    return _VERDICT_CODE[report.verdict]


def _sweep_values(args):
    if args.values is None or args.values.strip() == "":
        raise ConfigError("sweep needs a non-empty --values list")
    vals = [v for v in (s.strip() for s in args.values.split(",")) if v]
    if not vals:
        raise ConfigError("sweep needs a non-empty --values list")
    if args.param == "tau":
        return [float(v) for v in vals]
    if args.param == "winding":
        return [int(v) for v in vals]
    raise ConfigError(f"unknown sweep parameter {args.param!r}")


def _sweep_one(cfg: RunConfig, param: str, value, evaluate_only: bool) -> dict:
    spec = cfg.spec
    hint = cfg.hints[0] if cfg.hints else None
    if param == "tau":
        if spec.kind != "tension":
            raise ConfigError("tau sweeps need a tension functional")
        spec = replace(spec, tau=float(value))
    else:
        hint = np.zeros(cfg.manifold.ambient_dim if cfg.manifold.name.startswith("torus")
                        else 1, int)
        hint[0] = int(value)
    x0 = seed(cfg.constraint, cfg.manifold, cfg.n_grid, cfg.domain, hint)
    free = free_mask(cfg.constraint, cfg.n_grid, cfg.domain)
    if evaluate_only:
        return {"value": value, "objective": evaluate(spec, x0),
                "length": length(x0), "residual": el_residual(spec, x0, free),
                "iterations": 0, "verdict": "evaluated"}
    report = minimize(spec, cfg.constraint, x0, cfg.options)
    return {"value": value, "objective": report.final_objective,
            "length": length(report.minimizer), "residual": report.final_residual,
            "iterations": report.iterations, "verdict": report.verdict}


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    values = _sweep_values(args)
    out = _out_dir(args)

    def run(value):
        try:
            return _sweep_one(cfg, args.param, value, args.evaluate_only)
        except VarcurvesError as e:
            return {"value": value, "objective": float("nan"), "length": float("nan"),
                    "residual": float("nan"), "iterations": 0,
                    "verdict": f"failed: {e}"}

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(run, values))
    else:
        rows = [run(v) for v in values]

    lines = ["value,objective,length,residual,iterations,verdict"]
    for row in rows:
        lines.append(f"{row['value']:.17g},{row['objective']:.17g},"
                     f"{row['length']:.17g},{row['residual']:.17g},"
                     f"{row['iterations']},{row['verdict']}")
    (out / "sweep.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    bad = [r for r in rows if r["verdict"] not in ("converged", "evaluated")]
    return EXIT_ITER_LIMIT if bad else EXIT_OK


def cmd_check(args) -> int:
    try:
        results = checks.run_suite(args.suite)
    except KeyError:
        raise ConfigError(f"unknown check suite {args.suite!r} "
                          f"(choose from {sorted(checks.SUITES)})")
    ok = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: {r.detail}")
        ok = ok and r.passed
    print(f"{'all checks passed' if ok else 'CHECK FAILURES PRESENT'} "
          f"({sum(r.passed for r in results)}/{len(results)})")
    return EXIT_OK if ok else EXIT_ITER_LIMIT


def cmd_seed(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args)
    for curve, label in cfg.seed_list():
        name = "seed.curve" if label == "seed" else f"seed_{label.replace(',', '_')}.curve"
        save_curve(curve, out / name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="varcurves",
        description="Variationally defined curves on Riemannian manifolds: "
                    "solve, sweep, verify.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="minimize the configured functional")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("sweep", help="one solve (or evaluation) per parameter value")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=".")
    p.add_argument("--param", required=True, choices=("tau", "winding"))
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--evaluate-only", action="store_true",
                   help="evaluate seeds without descending")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("check", help="run a built-in verification suite")
    p.add_argument("--suite", required=True, choices=("gradient", "convergence", "oracle"))
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("seed", help="emit the seed curve(s) without solving")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=".")
    p.set_defaults(fn=cmd_seed)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateCurveError as e:
        print(f"degenerate curve: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except VarcurvesError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
