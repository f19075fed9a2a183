"""Prior vector fields A(t, x) used by the conditional-extremal functionals.

Every field kind carries an analytic sup bound; construction spot-checks the
bound on random samples so the boundedness hypothesis behind the existence
diagnostics is machine-checked, not assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, UsageError
from .manifolds import SO3, Euclidean, Manifold, Sphere, Torus

_SPOT_CHECK_DRAWS = 10_000
_SPOT_CHECK_SEED = 20260810


def _cross_matrix(w: np.ndarray) -> np.ndarray:
    return np.array([[0.0, -w[2], w[1]],
                     [w[2], 0.0, -w[0]],
                     [-w[1], w[0], 0.0]])


@dataclass(frozen=True)
class PriorField:
    """Tangent-valued field on a manifold, optionally modulated in time.

    kind: zero | constant_ambient | sphere_rotation | so3_left_invariant |
    torus_constant.  params is the kind's parameter vector (rotation axis,
    ambient vector, skew-generator axis, ...).  modulation, when given, is a
    scalar sample per grid node; eval reads it at grid times only.
    """

    manifold: Manifold
    kind: str
    params: np.ndarray = field(default=None, repr=False)
    modulation: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        p = None if self.params is None else np.asarray(self.params, float)
        object.__setattr__(self, "params", p)
        if self.modulation is not None:
            object.__setattr__(self, "modulation", np.asarray(self.modulation, float))
        self._validate()
        self._spot_check_bound()

    def _validate(self):
        m, k = self.manifold, self.kind
        if k == "zero":
            return
        if k == "constant_ambient":
            if self.params is None or self.params.shape != (m.ambient_dim,):
                raise ConfigError("constant_ambient needs an ambient-dimension vector")
        elif k == "sphere_rotation":
            if not (isinstance(m, Sphere) and m.ambient_dim == 3):
                raise ConfigError("sphere_rotation requires sphere:2")
            if self.params is None or self.params.shape != (3,):
                raise ConfigError("sphere_rotation needs a 3-vector axis")
        elif k == "so3_left_invariant":
            if not isinstance(m, SO3):
                raise ConfigError("so3_left_invariant requires the so3 manifold")
            if self.params is None or self.params.shape != (3,):
                raise ConfigError("so3_left_invariant needs a 3-vector (skew generator axis)")
        elif k == "torus_constant":
            if not isinstance(m, Torus):
                raise ConfigError("torus_constant requires a torus manifold")
            if self.params is None or self.params.shape != (m.ambient_dim,):
                raise ConfigError("torus_constant needs a torus-dimension vector")
        else:
            raise ConfigError(f"unknown field kind {self.kind!r}")

    # -- evaluation ---------------------------------------------------------

    def _modulation_at(self, t: np.ndarray) -> np.ndarray:
        if self.modulation is None:
            return np.ones(np.shape(t))
        n = self.modulation.shape[0] - 1
        idx = np.rint(np.asarray(t, float) * n).astype(int)
        if np.any(np.abs(np.asarray(t) * n - idx) > 1e-9):
            raise UsageError("modulated fields are defined at grid times only")
        return self.modulation[idx]

    def eval(self, t: float, point) -> "TangentVector":
        """Field value at a single (t, p) as a typed tangent vector."""
        from .manifolds import ManifoldPoint, TangentVector
        if not isinstance(point, ManifoldPoint):
            point = ManifoldPoint(self.manifold, np.asarray(point, float))
        v = self.eval_many(np.array([float(t)]), point.coords[None, :])[0]
        return TangentVector(point, v)

    def eval_many(self, t: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Field values at (t_j, x_j); rows of points are manifold points."""
        points = np.asarray(points, float)
        m = self._modulation_at(t)[..., None]
        if self.kind == "zero":
            return np.zeros_like(points)
        if self.kind == "constant_ambient":
            base = self.manifold.project_tangent(points, np.broadcast_to(self.params, points.shape))
            return m * base
        if self.kind == "sphere_rotation":
            return m * np.cross(np.broadcast_to(self.params, points.shape), points)
        if self.kind == "so3_left_invariant":
            omega = _cross_matrix(self.params)
            mats = points.reshape(points.shape[:-1] + (3, 3))
            return m * (mats @ omega).reshape(points.shape)
        if self.kind == "torus_constant":
            return m * np.broadcast_to(self.params, points.shape)
        raise UsageError(f"unknown field kind {self.kind!r}")

    def grad_inner(self, c: np.ndarray, t: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Ambient gradient in x of <c, A(t, x)> with c held fixed."""
        points = np.asarray(points, float)
        c = np.asarray(c, float)
        m = self._modulation_at(t)[..., None]
        if self.kind in ("zero", "torus_constant"):
            return np.zeros_like(points)
        if self.kind == "constant_ambient":
            v = np.broadcast_to(self.params, points.shape)
            return m * self.manifold.dproj_bilinear(points, c, v)
        if self.kind == "sphere_rotation":
            return m * (-np.cross(np.broadcast_to(self.params, points.shape), c))
        if self.kind == "so3_left_invariant":
            omega = _cross_matrix(self.params)
            cm = c.reshape(c.shape[:-1] + (3, 3))
            return m * (cm @ omega.T).reshape(points.shape)
        raise UsageError(f"unknown field kind {self.kind!r}")

    def grad_sq(self, t: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Ambient gradient in x of ||A(t, x)||^2."""
        points = np.asarray(points, float)
        m2 = self._modulation_at(t)[..., None] ** 2
        if self.kind in ("zero", "torus_constant"):
            return np.zeros_like(points)
        if self.kind == "constant_ambient":
            v = np.broadcast_to(self.params, points.shape)
            return m2 * self.manifold.dproj_bilinear(points, v, v)
        if self.kind == "sphere_rotation":
            a = np.cross(np.broadcast_to(self.params, points.shape), points)
            return m2 * (-2.0 * np.cross(np.broadcast_to(self.params, points.shape), a))
        if self.kind == "so3_left_invariant":
            omega = _cross_matrix(self.params)
            mats = points.reshape(points.shape[:-1] + (3, 3))
            return m2 * (2.0 * mats @ omega @ omega.T).reshape(points.shape)
        raise UsageError(f"unknown field kind {self.kind!r}")

    # -- boundedness ----------------------------------------------------------

    def bound(self) -> float:
        """Analytic sup bound for ||A(t, x)|| over all t and x."""
        msup = 1.0 if self.modulation is None else float(np.max(np.abs(self.modulation)))
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant_ambient":
            return msup * float(np.linalg.norm(self.params))
        if self.kind == "sphere_rotation":
            return msup * float(np.linalg.norm(self.params))
        if self.kind == "so3_left_invariant":
            return msup * float(np.linalg.norm(_cross_matrix(self.params)))
        if self.kind == "torus_constant":
            return msup * float(np.linalg.norm(self.params))
        raise UsageError(f"unknown field kind {self.kind!r}")

    def _spot_check_bound(self):
        if self.kind == "zero":
            return
        rng = np.random.default_rng(_SPOT_CHECK_SEED)
        pts = self.manifold.random_point(rng, _SPOT_CHECK_DRAWS)
        if self.modulation is None:
            t = np.zeros(_SPOT_CHECK_DRAWS)
        else:
            n = self.modulation.shape[0] - 1
            t = rng.integers(0, n + 1, size=_SPOT_CHECK_DRAWS) / n
        norms = np.linalg.norm(self.eval_many(t, pts), axis=-1)
        b = self.bound()
        if np.max(norms) > b * (1.0 + 1e-12) + 1e-15:
            raise ConfigError(f"field bound() = {b} violated by random sample "
                              f"({np.max(norms)})")


def zero_field(manifold: Manifold) -> PriorField:
    return PriorField(manifold, "zero")


def field_from_config(manifold: Manifold, cfg: dict) -> PriorField:
    """Build a field from {"kind": ..., "params": [...], "modulation": [...]}."""
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError("field config must be an object with a 'kind'")
    kind = cfg["kind"]
    params = cfg.get("params")
    modulation = cfg.get("modulation")
    return PriorField(manifold, kind,
                      None if params is None else np.asarray(params, float),
                      None if modulation is None else np.asarray(modulation, float))
