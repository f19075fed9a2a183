"""Closed-form reference curves used as independent oracles by tests and checks.

Oracles are computed by solving small linear systems at runtime (never
hard-coded solution constants) and evaluated by fixed-order Gauss-Legendre
quadrature of the continuum integrands, so they share no code with the
discrete stencil/quadrature path they are used to verify.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .curves import DiscreteCurve
from .errors import ConfigError, CutLocusError, UsageError
from .manifolds import SO3, Euclidean, Manifold, Sphere, Torus

_GAUSS_ORDER = 60


@dataclass(frozen=True)
class ClosedFormCurve:
    """Analytic curve on [0, 1] with exact derivative evaluators.

    accel_fn returns the covariant acceleration (zero for geodesics, the plain
    second derivative in flat space).
    """

    kind: str
    manifold: Manifold
    point_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    velocity_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    accel_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    speed: Optional[float] = None
    coefficients: Optional[np.ndarray] = field(default=None, repr=False)

    def point(self, t) -> np.ndarray:
        return self.point_fn(np.asarray(t, float))

    def velocity(self, t) -> np.ndarray:
        return self.velocity_fn(np.asarray(t, float))

    def accel(self, t) -> np.ndarray:
        return self.accel_fn(np.asarray(t, float))

    def sample(self, n_grid: int, domain: str = "interval") -> DiscreteCurve:
        n = n_grid + 1 if domain == "interval" else n_grid
        t = np.arange(n) / n_grid
        return DiscreteCurve(self.manifold, domain,
                             self.manifold.canonicalize(self.point(t)))


def _gauss_integral(fn: Callable[[np.ndarray], np.ndarray]) -> float:
    nodes, weights = np.polynomial.legendre.leggauss(_GAUSS_ORDER)
    t = 0.5 * (nodes + 1.0)
    return float(0.5 * np.sum(weights * fn(t)))


def tension_value(cf: ClosedFormCurve, tau: float) -> float:
    """Continuum tension objective 1/2 (int ||accel||^2 + tau^2 int ||vel||^2)."""
    if cf.kind == "geodesic":
        return 0.5 * tau**2 * cf.speed**2
    acc = _gauss_integral(lambda t: np.sum(cf.accel(t) ** 2, axis=-1))
    vel = _gauss_integral(lambda t: np.sum(cf.velocity(t) ** 2, axis=-1))
    return 0.5 * (acc + tau**2 * vel)


# ---------------------------------------------------------------------------
# Euclidean families
# ---------------------------------------------------------------------------

def _as_coords(p) -> np.ndarray:
    return np.atleast_1d(np.asarray(p, float))


def hermite_cubic(p, v, q, w) -> ClosedFormCurve:
    """The unique cubic with x(0)=p, x'(0)=v, x(1)=q, x'(1)=w (per coordinate)."""
    p, v, q, w = map(_as_coords, (p, v, q, w))
    dim = p.shape[0]
    # rows: value/derivative conditions on [1, t, t^2, t^3]
    mat = np.array([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [1.0, 1.0, 1.0, 1.0],
        [0.0, 1.0, 2.0, 3.0],
    ])
    coef = np.linalg.solve(mat, np.stack([p, v, q, w]))  # (4, dim)

    powers = np.arange(4)

    def point(t):
        return (t[..., None, None] ** powers[:, None] * coef).sum(-2)

    dcoef = coef[1:] * np.array([1.0, 2.0, 3.0])[:, None]
    ddcoef = dcoef[1:] * np.array([1.0, 2.0])[:, None]

    def vel(t):
        return (t[..., None, None] ** powers[:3, None] * dcoef).sum(-2)

    def acc(t):
        return (t[..., None, None] ** powers[:2, None] * ddcoef).sum(-2)

    return ClosedFormCurve("hermite_cubic", Euclidean(dim), point, vel, acc,
                           coefficients=coef)


def tension_1d(p, q, tau: float, bc_kind: str = "clamped", v=None, w=None) -> ClosedFormCurve:
    """Solution of x'''' - tau^2 x'' = 0 in the basis {1, t, cosh(tau t), sinh(tau t)}.

    clamped matches positions and velocities at both ends; position_only
    imposes the natural conditions x''(0) = x''(1) = 0 (which force the
    straight line).
    """
    if tau <= 0:
        raise ConfigError("tension_1d needs tau > 0 (use hermite_cubic at tau = 0)")
    p, q = map(_as_coords, (p, q))
    dim = p.shape[0]
    ch, sh = np.cosh(tau), np.sinh(tau)
    if bc_kind == "clamped":
        if v is None or w is None:
            raise ConfigError("clamped tension_1d needs end velocities")
        v, w = map(_as_coords, (v, w))
        mat = np.array([
            [1.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, tau],
            [1.0, 1.0, ch, sh],
            [0.0, 1.0, tau * sh, tau * ch],
        ])
        rhs = np.stack([p, v, q, w])
    elif bc_kind == "position_only":
        mat = np.array([
            [1.0, 0.0, 1.0, 0.0],
            [1.0, 1.0, ch, sh],
            [0.0, 0.0, tau**2, 0.0],
            [0.0, 0.0, tau**2 * ch, tau**2 * sh],
        ])
        rhs = np.stack([p, q, np.zeros(dim), np.zeros(dim)])
    else:
        raise ConfigError("bc_kind must be 'clamped' or 'position_only'")
    try:
        coef = np.linalg.solve(mat, rhs)  # rows: [const, linear, cosh, sinh]
    except np.linalg.LinAlgError as e:
        raise ConfigError(f"tension_1d system is singular at tau={tau}") from e

    a, b, c, d = coef

    def point(t):
        tt = t[..., None]
        return a + b * tt + c * np.cosh(tau * tt) + d * np.sinh(tau * tt)

    def vel(t):
        tt = t[..., None]
        return b + tau * (c * np.sinh(tau * tt) + d * np.cosh(tau * tt))

    def acc(t):
        tt = t[..., None]
        return tau**2 * (c * np.cosh(tau * tt) + d * np.sinh(tau * tt))

    return ClosedFormCurve("tension_1d", Euclidean(dim), point, vel, acc,
                           coefficients=coef)


def conditional_line(p, q, a_const):
    """Straight constant-speed line and its conditional k=1 objective value
    1/2 ||(q - p) - A||^2 against a constant ambient field A."""
    p, q, a_const = map(_as_coords, (p, q, a_const))
    dim = p.shape[0]
    delta = q - p

    def point(t):
        return p + t[..., None] * delta

    def vel(t):
        return np.broadcast_to(delta, np.shape(t) + (dim,)).copy()

    def acc(t):
        return np.zeros(np.shape(t) + (dim,))

    value = 0.5 * float(np.sum((delta - a_const) ** 2))
    cf = ClosedFormCurve("line", Euclidean(dim), point, vel, acc,
                         speed=float(np.linalg.norm(delta)))
    return cf, value


# ---------------------------------------------------------------------------
# Geodesics (with winding)
# ---------------------------------------------------------------------------

def geodesic(m: Manifold, p, q, winding: int = 0, plane=None) -> ClosedFormCurve:
    """Constant-speed geodesic from p to q, wrapped `winding` extra times.

    On the sphere, `plane` (a tangent direction at p) must be supplied when p
    and q are (anti)podal, otherwise the great circle is ambiguous.
    """
    p = m.canonicalize(_as_coords(p))
    q = m.canonicalize(_as_coords(q))
    if isinstance(m, Euclidean):
        if winding != 0:
            raise ConfigError("winding is meaningless on euclidean space")
        delta = q - p

        def point(t):
            return p + t[..., None] * delta

        def vel(t):
            return np.broadcast_to(delta, np.shape(t) + (m.ambient_dim,)).copy()

        def acc(t):
            return np.zeros(np.shape(t) + (m.ambient_dim,))

        return ClosedFormCurve("geodesic", m, point, vel, acc,
                               speed=float(np.linalg.norm(delta)))
    if isinstance(m, Torus):
        w = np.atleast_1d(np.asarray(winding, int))
        if w.shape == (1,) and m.ambient_dim > 1:
            w = np.full(m.ambient_dim, int(w[0]))
        delta = Torus.wrap(q - p) + 2 * np.pi * w

        def point(t):
            return m.canonicalize(p + t[..., None] * delta)

        def vel(t):
            return np.broadcast_to(delta, np.shape(t) + (m.ambient_dim,)).copy()

        def acc(t):
            return np.zeros(np.shape(t) + (m.ambient_dim,))

        return ClosedFormCurve("geodesic", m, point, vel, acc,
                               speed=float(np.linalg.norm(delta)))
    if isinstance(m, Sphere):
        base = float(m.dist(p, q))
        if base >= np.pi - 1e-8:
            if plane is None:
                raise CutLocusError("geodesic through (near-)antipodal points needs "
                                    "explicit great-circle plane data")
            e = m.project_tangent(p, _as_coords(plane))
            ne = np.linalg.norm(e)
            if ne < 1e-12:
                raise ConfigError("plane direction is (numerically) radial")
            e = e / ne
        elif base < 1e-12:
            if winding == 0:
                def const_point(t):
                    return np.broadcast_to(p, np.shape(t) + (m.ambient_dim,)).copy()

                def const_zero(t):
                    return np.zeros(np.shape(t) + (m.ambient_dim,))

                return ClosedFormCurve("geodesic", m, const_point, const_zero,
                                       const_zero, speed=0.0)
            if plane is None:
                raise CutLocusError("closed wrapped geodesic at p = q needs plane data")
            e = m.project_tangent(p, _as_coords(plane))
            e = e / np.linalg.norm(e)
        else:
            e = m.log(p, q) / base
            e = e / np.linalg.norm(e)
        total = base + 2 * np.pi * int(winding)

        def point(t):
            ang = total * t[..., None]
            return np.cos(ang) * p + np.sin(ang) * e

        def vel(t):
            ang = total * t[..., None]
            return total * (-np.sin(ang) * p + np.cos(ang) * e)

        def acc(t):
            return np.zeros(np.shape(t) + (m.ambient_dim,))

        return ClosedFormCurve("geodesic", m, point, vel, acc, speed=abs(total))
    if isinstance(m, SO3):
        om = m._rel_rotation_log(p, q)[0]
        theta = float(np.linalg.norm(om)) / np.sqrt(2.0)
        if theta < 1e-12 and winding != 0:
            axis = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        elif theta < 1e-12:
            raise ConfigError("degenerate geodesic: p = q with no winding")
        else:
            axis = om / theta
        total = theta + 2 * np.pi * int(winding)
        pm = p.reshape(3, 3)

        def point(t):
            t = np.atleast_1d(t)
            out = np.empty((len(t), 9))
            for i, ti in enumerate(t):
                out[i] = (pm @ SO3._expm_skew(ti * total * axis)).reshape(9)
            return out

        def vel(t):
            pts = point(t).reshape(-1, 3, 3)
            return (pts @ (total * axis)).reshape(-1, 9)

        def acc(t):
            return np.zeros((np.size(t), 9))

        # Frobenius speed: sqrt(2) * angular rate
        return ClosedFormCurve("geodesic", m, point, vel, acc,
                               speed=np.sqrt(2.0) * abs(total))
    raise UsageError(f"geodesic oracle does not support {m.name}")
