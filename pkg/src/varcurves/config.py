"""Run configuration: JSON in, validated objects out."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .constraints import ConstraintSet, constraint_from_config, free_mask, seed
from .curves import DiscreteCurve
from .errors import ConfigError
from .functionals import FunctionalSpec
from .manifolds import Manifold, make_manifold
from .optimize import SolveOptions

_SOLVE_KEYS = {"max_iters", "grad_tol", "armijo_c1", "backtrack", "initial_step",
               "step_floor", "record_every"}
_TOP_KEYS = {"manifold", "grid_n", "domain", "functional", "constraints",
             "winding_hint", "winding_hints", "solve"}


@dataclass(frozen=True)
class RunConfig:
    manifold: Manifold
    domain: str
    n_grid: int
    spec: FunctionalSpec
    constraint: ConstraintSet
    hints: Optional[List[np.ndarray]]   # None, or one hint per multistart seed
    multistart: bool
    options: SolveOptions

    def build_seed(self, hint=None) -> DiscreteCurve:
        return seed(self.constraint, self.manifold, self.n_grid, self.domain, hint)

    def seed_list(self):
        """Labelled seeds: one per hint (a single unlabelled seed when no hints)."""
        if self.hints is None:
            return [(self.build_seed(None), "seed")]
        return [(self.build_seed(h), "w=" + ",".join(str(int(v)) for v in np.atleast_1d(h)))
                for h in self.hints]


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("manifold", "grid_n", "functional", "constraints"):
        if key not in data:
            raise ConfigError(f"config is missing required key {key!r}")

    manifold = make_manifold(data["manifold"])
    domain = data.get("domain", "interval")
    if domain not in ("interval", "circle"):
        raise ConfigError(f"unknown domain {domain!r}")
    try:
        n_grid = int(data["grid_n"])
    except (TypeError, ValueError):
        raise ConfigError("grid_n must be an integer")
    if n_grid < 4:
        raise ConfigError("grid_n must be at least 4")

    spec = FunctionalSpec.from_config(data["functional"], manifold)
    constraint = constraint_from_config(data["constraints"])
    free_mask(constraint, n_grid, domain)  # validates domain fit and knot snapping

    _validate_geometry(manifold, constraint)

    hints = None
    multistart = False
    if "winding_hints" in data and "winding_hint" in data:
        raise ConfigError("give either winding_hint or winding_hints, not both")
    if "winding_hints" in data:
        raw = data["winding_hints"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("winding_hints must be a non-empty list")
        hints = [np.atleast_1d(np.asarray(h)) for h in raw]
        multistart = len(hints) > 1
    elif "winding_hint" in data:
        hints = [np.atleast_1d(np.asarray(data["winding_hint"]))]

    opts_cfg = data.get("solve", {})
    if not isinstance(opts_cfg, dict):
        raise ConfigError("solve options must be an object")
    unknown = set(opts_cfg) - _SOLVE_KEYS
    if unknown:
        raise ConfigError(f"unknown solve options: {sorted(unknown)}")
    options = SolveOptions(**opts_cfg)

    return RunConfig(manifold, domain, n_grid, spec, constraint, hints,
                     multistart, options)


def _validate_geometry(manifold: Manifold, c: ConstraintSet) -> None:
    dim = manifold.ambient_dim

    def check_vec(v, what):
        if v is not None and np.asarray(v).shape != (dim,):
            raise ConfigError(f"{what} must have {dim} coordinates on {manifold.name}")

    if c.kind == "clamped":
        check_vec(c.left_pos, "left position")
        check_vec(c.right_pos, "right position")
        check_vec(c.left_vel, "left velocity")
        check_vec(c.right_vel, "right velocity")
        for p, what in ((c.left_pos, "left position"), (c.right_pos, "right position")):
            if manifold.constraint_residual(np.asarray(p, float)) > 1e-6:
                raise ConfigError(f"{what} is not on {manifold.name}")
    elif c.kind == "interpolation":
        if c.knot_points.shape[1] != dim:
            raise ConfigError(f"knot positions must have {dim} coordinates")
        res = manifold.constraint_residual(c.knot_points)
        if np.any(res > 1e-6):
            raise ConfigError(f"knot {int(np.argmax(res))} is not on {manifold.name}")


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from e
    return parse_config(data)
