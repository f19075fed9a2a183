"""Discrete curves on a uniform grid and their derived fields and norms.

A curve is a list of manifold samples at times t_j = j/N, either on the unit
interval (N+1 samples) or on the circle (N samples, index arithmetic mod N).
Velocities and covariant accelerations are projected difference stencils:
central second-order differences at interior samples, one-sided second-order
velocity stencils at interval endpoints.  Covariant acceleration is only
defined at interior samples on the interval; the endpoint entries of the field
are zero and are never read by functionals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCurveError, UsageError
from .manifolds import CUT_LOCUS_TOL, Manifold, ManifoldPoint, Torus, make_manifold

_SAMPLE_TOL = 1e-8   # allowed constraint residual for curve samples
MIN_GRID = 4


@dataclass(frozen=True)
class DiscreteCurve:
    """Uniformly sampled path on a manifold.

    samples has shape (n, ambient_dim): n = N+1 on the interval, n = N on the
    circle.  Immutable; all operations return new curves.
    """

    manifold: Manifold
    domain: str  # "interval" | "circle"
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.domain not in ("interval", "circle"):
            raise UsageError(f"unknown domain kind {self.domain!r}")
        x = np.array(self.samples, float)
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        if x.ndim != 2 or x.shape[1] != self.manifold.ambient_dim:
            raise UsageError("samples must have shape (n, ambient_dim)")
        if self.grid_n < MIN_GRID:
            raise UsageError(f"grid too coarse: N = {self.grid_n} < {MIN_GRID}")
        res = self.manifold.constraint_residual(x)
        if np.any(res > _SAMPLE_TOL):
            j = int(np.argmax(res))
            raise UsageError(f"sample {j} is off the manifold (residual {res[j]:.2e})")
        bad = _steps_degenerate(self.manifold, x, self.domain)
        if np.any(bad):
            raise DegenerateCurveError(int(np.argmax(bad)))

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def grid_n(self) -> int:
        """Grid size N (number of subintervals; equals sample count on the circle)."""
        return self.n_samples - 1 if self.domain == "interval" else self.n_samples

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.grid_n

    def point(self, j: int) -> ManifoldPoint:
        return ManifoldPoint(self.manifold, self.samples[j])

    def with_samples(self, samples: np.ndarray) -> "DiscreteCurve":
        return DiscreteCurve(self.manifold, self.domain, samples)


@dataclass(frozen=True)
class TangentField:
    """One tangent vector per curve sample, based at the corresponding sample."""

    curve: DiscreteCurve
    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.vectors, float)
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)
        if v.shape != self.curve.samples.shape:
            raise UsageError("field shape does not match curve samples")
        proj = self.curve.manifold.project_tangent(self.curve.samples, v)
        scale = 1.0 + np.max(np.abs(v)) if v.size else 1.0
        if np.max(np.abs(proj - v)) > 1e-8 * scale:
            raise UsageError("field vectors are not tangent at their base samples")


def _steps_degenerate(manifold: Manifold, x: np.ndarray, domain: str) -> np.ndarray:
    if not manifold.compact:
        return np.zeros(0, bool)
    p, q = _consecutive(x, domain)
    if isinstance(manifold, Torus):
        d = np.abs(Torus.wrap(q - p))
        return np.any(d >= np.pi - CUT_LOCUS_TOL, axis=-1)
    return manifold.dist(p, q) >= manifold.injectivity_radius - CUT_LOCUS_TOL


def _consecutive(x: np.ndarray, domain: str):
    if domain == "interval":
        return x[:-1], x[1:]
    return x, np.roll(x, -1, axis=0)


def forward_steps(curve: DiscreteCurve) -> np.ndarray:
    """Per-segment ambient displacements (wrapped on the torus).

    Shape (N, m): row j is the displacement of sample j+1 relative to sample j
    (mod N on the circle).
    """
    p, q = _consecutive(curve.samples, curve.domain)
    return curve.manifold.relative_step(p, q)


def first_difference(curve: DiscreteCurve) -> np.ndarray:
    """Ambient first-derivative stencil values (unprojected), one row per sample."""
    n = curve.grid_n
    d = forward_steps(curve)
    if curve.domain == "circle":
        return n * (d + np.roll(d, 1, axis=0)) / 2.0
    out = np.empty_like(curve.samples)
    out[1:-1] = n * (d[1:] + d[:-1]) / 2.0
    out[0] = n * (3.0 * d[0] - d[1]) / 2.0
    out[-1] = n * (3.0 * d[-1] - d[-2]) / 2.0
    return out


def second_difference(curve: DiscreteCurve) -> np.ndarray:
    """Ambient second-derivative stencil values (unprojected).

    Interval endpoints are zero; only interior rows carry stencil values.
    """
    n = curve.grid_n
    d = forward_steps(curve)
    if curve.domain == "circle":
        return n * n * (d - np.roll(d, 1, axis=0))
    out = np.zeros_like(curve.samples)
    out[1:-1] = n * n * (d[1:] - d[:-1])
    return out


def velocity(curve: DiscreteCurve) -> TangentField:
    """Discrete velocity field: projected difference stencils, exact on affine data."""
    raw = first_difference(curve)
    return TangentField(curve, curve.manifold.project_tangent(curve.samples, raw))


def covariant_accel(curve: DiscreteCurve) -> TangentField:
    """Discrete covariant acceleration: tangential part of the ambient second difference.

    Zero (by convention, not by computation) at interval endpoints.
    """
    raw = second_difference(curve)
    return TangentField(curve, curve.manifold.project_tangent(curve.samples, raw))


def node_weights(curve: DiscreteCurve) -> np.ndarray:
    """Trapezoid quadrature weights at the curve samples (uniform on the circle)."""
    n = curve.grid_n
    if curve.domain == "circle":
        return np.full(curve.n_samples, 1.0 / n)
    w = np.full(curve.n_samples, 1.0 / n)
    w[0] = w[-1] = 0.5 / n
    return w


def interior_weights(curve: DiscreteCurve) -> np.ndarray:
    """Quadrature weights for integrands known at interior samples only.

    Trapezoid on the interior subgrid plus linearly-extrapolated end strips
    (boundary weights 2 and 1/2); exact for affine integrands and second-order
    for smooth ones.  Uniform on the circle.  Endpoint entries are zero on the
    interval so the weights align with second-difference fields.
    """
    n = curve.grid_n
    if curve.domain == "circle":
        return np.full(curve.n_samples, 1.0 / n)
    w = np.full(curve.n_samples, 1.0 / n)
    w[0] = w[-1] = 0.0
    w[1] = w[-2] = 2.0 / n
    if curve.n_samples >= 7:
        w[2] = w[-3] = 0.5 / n
    else:
        # N = 4,5: the two Gregory corrections overlap; fall back to mass-
        # preserving absorbed weights
        w[1] = w[-2] = 1.5 / n
    return w


def field_covariant_derivative(f: TangentField) -> TangentField:
    """Covariant derivative of a field along its curve: projected central differences.

    One-sided second-order stencils at interval endpoints (fields, unlike
    accelerations, are defined at every sample).
    """
    curve = f.curve
    n = curve.grid_n
    v = f.vectors
    if curve.domain == "circle":
        raw = n * (np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)) / 2.0
    else:
        raw = np.empty_like(v)
        raw[1:-1] = n * (v[2:] - v[:-2]) / 2.0
        raw[0] = n * (-3.0 * v[0] + 4.0 * v[1] - v[2]) / 2.0
        raw[-1] = n * (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / 2.0
    return TangentField(curve, curve.manifold.project_tangent(curve.samples, raw))


def sobolev_norm_sq(f: TangentField, k: int) -> float:
    """Squared discrete Sobolev norm: sum over orders j <= k of the L2 norm of the
    j-th covariant derivative, trapezoid quadrature."""
    if not 0 <= k <= 2:
        raise UsageError("sobolev_norm_sq supports orders 0 <= k <= 2")
    w = node_weights(f.curve)
    total = 0.0
    g = f
    for i in range(k + 1):
        if i > 0:
            g = field_covariant_derivative(g)
        total += float(np.sum(w * np.sum(g.vectors**2, axis=1)))
    return total


def sup_norm(f: TangentField, k: int) -> float:
    """Discrete C^k norm: max over samples of the summed derivative norms."""
    if not 0 <= k <= 2:
        raise UsageError("sup_norm supports orders 0 <= k <= 2")
    acc = np.zeros(f.curve.n_samples)
    g = f
    for i in range(k + 1):
        if i > 0:
            g = field_covariant_derivative(g)
        acc += np.linalg.norm(g.vectors, axis=1)
    return float(np.max(acc))


def length(curve: DiscreteCurve) -> float:
    """Geodesic segment length: sum of distances between consecutive samples."""
    p, q = _consecutive(curve.samples, curve.domain)
    return float(np.sum(curve.manifold.dist(p, q)))


def quadrature_length(curve: DiscreteCurve) -> float:
    """Quadrature of the discrete speed (trapezoid of nodal velocity norms).

    By the Cauchy-Schwarz inequality this length satisfies
    quadrature_length(x)^2 <= sobolev_norm_sq(velocity(x), 0) exactly, which is
    the discrete form of the length-domination bound used by the diagnostics.
    """
    w = node_weights(curve)
    v = velocity(curve).vectors
    return float(np.sum(w * np.linalg.norm(v, axis=1)))


def winding_vector(curve: DiscreteCurve) -> np.ndarray:
    """Sum of wrapped angular increments divided by 2*pi (torus/circle curves).

    Integer-valued on closed loops; on open curves the value is the lifted
    endpoint displacement over 2*pi, which is locally constant under small
    deformations that fix the endpoints.
    """
    if not isinstance(curve.manifold, Torus):
        raise UsageError("winding_vector is defined for torus/circle curves only")
    return np.sum(forward_steps(curve), axis=0) / (2 * np.pi)


def equicontinuity_ratio(curve: DiscreteCurve, pairs: np.ndarray) -> float:
    """Max over index pairs of dist(x_a, x_b) / (sqrt|t_a - t_b| * ||velocity||_L2).

    Ratios <= 1 witness the discrete Hoelder/equicontinuity bound tying
    pointwise distances to the velocity norm.  Pairs with equal indices are
    skipped.
    """
    pairs = np.asarray(pairs, int)
    vnorm = np.sqrt(sobolev_norm_sq(velocity(curve), 0))
    if vnorm == 0.0:
        d = curve.manifold.dist(curve.samples[pairs[:, 0]], curve.samples[pairs[:, 1]])
        return 0.0 if np.all(d == 0) else np.inf
    t = curve.times
    a, b = pairs[:, 0], pairs[:, 1]
    keep = a != b
    if not np.any(keep):
        return 0.0
    a, b = a[keep], b[keep]
    d = curve.manifold.dist(curve.samples[a], curve.samples[b])
    bound = np.sqrt(np.abs(t[a] - t[b])) * vnorm
    return float(np.max(d / bound))


# ---------------------------------------------------------------------------
# Curve file format: one JSON header line + CSV rows "t,c0,c1,..."
# ---------------------------------------------------------------------------

def dump_curve(curve: DiscreteCurve) -> str:
    header = json.dumps({
        "manifold": curve.manifold.name,
        "domain_kind": curve.domain,
        "n_samples": curve.n_samples,
    }, sort_keys=True)
    rows = []
    for t, row in zip(curve.times, curve.samples):
        rows.append(",".join(f"{v:.17g}" for v in (t, *row)))
    return header + "\n" + "\n".join(rows) + "\n"


def save_curve(curve: DiscreteCurve, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_curve(curve))


def parse_curve(text: str) -> DiscreteCurve:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise UsageError("empty curve file")
    header = json.loads(lines[0])
    manifold = make_manifold(header["manifold"])
    n = int(header["n_samples"])
    if len(lines) - 1 != n:
        raise UsageError(f"curve file declares {n} samples but has {len(lines) - 1} rows")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    if data.shape[1] != manifold.ambient_dim + 1:
        raise UsageError("curve file rows have the wrong number of columns")
    return DiscreteCurve(manifold, header["domain_kind"], data[:, 1:])


def load_curve(path) -> DiscreteCurve:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_curve(fh.read())
