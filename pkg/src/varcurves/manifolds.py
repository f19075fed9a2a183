"""Riemannian manifolds embedded in an ambient inner-product space.

Provided manifolds: Euclidean d-space, the unit sphere S^d in R^{d+1}, the flat
torus T^d = R^d mod 2*pi (the circle at d = 1), and the rotation group SO(3)
stored as 3x3 matrices flattened row-major to 9-vectors with the Frobenius
ambient metric.

All metrics are induced by the ambient dot product, so tangent projection is an
orthogonal projection and the covariant derivative of a field along a curve is
the projected ambient derivative.  Array-level operations broadcast over leading
axes: points and vectors are arrays whose last axis is the ambient dimension.

Metric normalisation note: on SO(3) the Frobenius metric gives geodesic
distance sqrt(2) * (rotation angle); functional values on SO(3) scale
accordingly relative to conventions that use angle directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, CutLocusError, UsageError

# Refuse log/transport this close (in angle) to the cut locus instead of
# silently picking a branch.
CUT_LOCUS_TOL = 1e-8


class Manifold:
    """Base class; concrete manifolds implement the array-level geometry.

    Instances are immutable and safe to share across concurrent solves.
    """

    name: str
    ambient_dim: int
    compact: bool
    injectivity_radius: float  # in geodesic distance

    # -- point handling ----------------------------------------------------

    def canonicalize(self, x: np.ndarray) -> np.ndarray:
        """Return the canonical representative of x (renormalisation)."""
        return np.asarray(x, float)

    def constraint_residual(self, x: np.ndarray) -> np.ndarray:
        """Distance of x from satisfying the defining constraint (0 on-manifold)."""
        return np.zeros(np.shape(x)[:-1])

    def random_point(self, rng: np.random.Generator, n: int = 1) -> np.ndarray:
        raise NotImplementedError

    # -- tangent structure --------------------------------------------------

    def project_tangent(self, p: np.ndarray, a: np.ndarray) -> np.ndarray:
        """Orthogonal projection of ambient vector a onto the tangent space at p."""
        raise NotImplementedError

    def dproj_bilinear(self, p: np.ndarray, u: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Ambient gradient in p of <u, P(p) w> with u, w held fixed.

        Zero for flat manifolds; the curved-manifold contribution to exact
        gradients of projected-stencil objectives.
        """
        return np.zeros_like(np.broadcast_arrays(p, u)[0])

    def dproj_quad(self, p: np.ndarray, c: np.ndarray) -> np.ndarray:
        """Ambient gradient in p of <c, P(p) c> with c held fixed."""
        return self.dproj_bilinear(p, c, c)

    # -- exponential geometry ------------------------------------------------

    def exp(self, p: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Riemannian exponential; result is renormalised onto the manifold."""
        raise NotImplementedError

    def log(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Inverse of exp; raises CutLocusError within CUT_LOCUS_TOL of the cut locus."""
        raise NotImplementedError

    def dist(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Geodesic distance.  Total (defined at the cut locus, where it is unambiguous)."""
        raise NotImplementedError

    def transport(self, p: np.ndarray, q: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Parallel transport of u along the minimal geodesic from p to q."""
        raise NotImplementedError

    def relative_step(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Ambient displacement of q relative to p used by difference stencils.

        Plain q - p except on the torus, where the minimal (wrapped)
        representative is taken so stencils act on a local lift.
        """
        return np.asarray(q, float) - np.asarray(p, float)

    # -- helpers -------------------------------------------------------------

    def inner(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.sum(np.asarray(u, float) * np.asarray(v, float), axis=-1)

    def norm(self, u: np.ndarray) -> np.ndarray:
        return np.linalg.norm(np.asarray(u, float), axis=-1)

    def check_point(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        return bool(np.all(self.constraint_residual(x) < tol))

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


class Euclidean(Manifold):
    """R^d with the standard metric."""

    compact = False
    injectivity_radius = np.inf

    def __init__(self, dim: int):
        if dim < 1:
            raise ConfigError("euclidean dimension must be >= 1")
        self.dim = dim
        self.ambient_dim = dim
        self.name = f"euclidean:{dim}"

    def random_point(self, rng, n=1):
        return rng.normal(size=(n, self.dim))

    def project_tangent(self, p, a):
        return np.array(a, float, copy=True)

    def exp(self, p, v):
        return np.asarray(p, float) + np.asarray(v, float)

    def log(self, p, q):
        return np.asarray(q, float) - np.asarray(p, float)

    def dist(self, p, q):
        return np.linalg.norm(np.asarray(q, float) - np.asarray(p, float), axis=-1)

    def transport(self, p, q, u):
        return np.array(u, float, copy=True)


class Sphere(Manifold):
    """Unit sphere S^d embedded in R^{d+1}."""

    compact = True
    injectivity_radius = np.pi

    def __init__(self, dim: int):
        if dim < 1:
            raise ConfigError("sphere dimension must be >= 1")
        self.dim = dim
        self.ambient_dim = dim + 1
        self.name = f"sphere:{dim}"

    def canonicalize(self, x):
        x = np.asarray(x, float)
        return x / np.linalg.norm(x, axis=-1, keepdims=True)

    def constraint_residual(self, x):
        return np.abs(np.linalg.norm(np.asarray(x, float), axis=-1) - 1.0)

    def random_point(self, rng, n=1):
        return self.canonicalize(rng.normal(size=(n, self.ambient_dim)))

    def project_tangent(self, p, a):
        p = np.asarray(p, float)
        a = np.asarray(a, float)
        return a - np.sum(a * p, axis=-1, keepdims=True) * p

    def dproj_bilinear(self, p, u, w):
        p = np.asarray(p, float)
        u = np.asarray(u, float)
        w = np.asarray(w, float)
        pu = np.sum(p * u, axis=-1, keepdims=True)
        pw = np.sum(p * w, axis=-1, keepdims=True)
        return -(pw * u + pu * w)

    def exp(self, p, v):
        p = np.asarray(p, float)
        v = np.asarray(v, float)
        theta = np.linalg.norm(v, axis=-1, keepdims=True)
        # sin(theta)/theta via sinc, exact at theta = 0
        out = np.cos(theta) * p + np.sinc(theta / np.pi) * v
        return self.canonicalize(out)

    def _angle(self, p, q):
        # atan2 form: well-conditioned at angle 0 (arccos loses half the digits there)
        p = np.asarray(p, float)
        q = np.asarray(q, float)
        c = np.sum(p * q, axis=-1)
        s = np.linalg.norm(q - c[..., None] * p, axis=-1)
        return np.arctan2(s, c)

    def log(self, p, q):
        p = np.asarray(p, float)
        q = np.asarray(q, float)
        theta = self._angle(p, q)
        if np.any(theta >= np.pi - CUT_LOCUS_TOL):
            raise CutLocusError("sphere log: points are (nearly) antipodal")
        u = self.project_tangent(p, q - p)
        nu = np.linalg.norm(u, axis=-1, keepdims=True)
        scale = np.where(nu > 1e-300, theta[..., None] / np.where(nu > 1e-300, nu, 1.0), 0.0)
        return scale * u

    def dist(self, p, q):
        return self._angle(p, q)

    def transport(self, p, q, u):
        p = np.asarray(p, float)
        q = np.asarray(q, float)
        u = np.asarray(u, float)
        theta = self._angle(p, q)
        if np.any(theta >= np.pi - CUT_LOCUS_TOL):
            raise CutLocusError("sphere transport: points are (nearly) antipodal")
        small = theta < 1e-14
        if np.all(small):
            return np.array(u, float, copy=True)
        e = self.project_tangent(p, q - p)
        ne = np.linalg.norm(e, axis=-1, keepdims=True)
        e = e / np.where(ne > 0, ne, 1.0)
        ue = np.sum(u * e, axis=-1, keepdims=True)
        th = theta[..., None]
        out = u + ue * ((np.cos(th) - 1.0) * e - np.sin(th) * p)
        return np.where(small[..., None], u, out)


class Torus(Manifold):
    """Flat torus R^d mod 2*pi; coordinates canonical in [0, 2*pi)."""

    compact = True
    injectivity_radius = np.pi

    def __init__(self, dim: int):
        if dim < 1:
            raise ConfigError("torus dimension must be >= 1")
        self.dim = dim
        self.ambient_dim = dim
        self.name = f"torus:{dim}"

    @staticmethod
    def wrap(delta: np.ndarray) -> np.ndarray:
        """Map each coordinate of a displacement to the minimal representative in (-pi, pi]."""
        d = np.mod(np.asarray(delta, float) + np.pi, 2 * np.pi) - np.pi
        return np.where(d == -np.pi, np.pi, d)

    def canonicalize(self, x):
        return np.mod(np.asarray(x, float), 2 * np.pi)

    def constraint_residual(self, x):
        x = np.asarray(x, float)
        return np.max(np.abs(x - self.canonicalize(x)), axis=-1)

    def random_point(self, rng, n=1):
        return rng.uniform(0.0, 2 * np.pi, size=(n, self.dim))

    def project_tangent(self, p, a):
        return np.array(a, float, copy=True)

    def exp(self, p, v):
        return self.canonicalize(np.asarray(p, float) + np.asarray(v, float))

    def log(self, p, q):
        d = self.wrap(np.asarray(q, float) - np.asarray(p, float))
        if np.any(np.abs(d) >= np.pi - CUT_LOCUS_TOL):
            raise CutLocusError("torus log: a coordinate is (nearly) at the cut locus")
        return d

    def dist(self, p, q):
        return np.linalg.norm(self.wrap(np.asarray(q, float) - np.asarray(p, float)), axis=-1)

    def transport(self, p, q, u):
        return np.array(u, float, copy=True)

    def relative_step(self, p, q):
        return self.wrap(np.asarray(q, float) - np.asarray(p, float))


class SO3(Manifold):
    """Rotation group SO(3): 3x3 matrices, row-major 9-vectors, Frobenius metric.

    Geodesic distance is sqrt(2) times the rotation angle; the injectivity
    radius is therefore sqrt(2)*pi.
    """

    compact = True
    injectivity_radius = np.sqrt(2.0) * np.pi

    def __init__(self):
        self.dim = 3
        self.ambient_dim = 9
        self.name = "so3"

    @staticmethod
    def _mat(x):
        return np.asarray(x, float).reshape(np.shape(x)[:-1] + (3, 3))

    @staticmethod
    def _vec(m):
        return np.asarray(m, float).reshape(np.shape(m)[:-2] + (9,))

    def canonicalize(self, x):
        m = self._mat(x)
        u, _, vt = np.linalg.svd(m)
        det = np.linalg.det(u @ vt)
        fix = np.ones(np.shape(det) + (3,))
        fix[..., 2] = det
        r = (u * fix[..., None, :]) @ vt
        return self._vec(r)

    def constraint_residual(self, x):
        m = self._mat(x)
        eye = np.eye(3)
        ortho = np.linalg.norm(
            np.swapaxes(m, -1, -2) @ m - eye, axis=(-2, -1))
        det = np.abs(np.linalg.det(m) - 1.0)
        return np.maximum(ortho, det)

    def random_point(self, rng, n=1):
        return self.canonicalize(rng.normal(size=(n, 9)))

    def project_tangent(self, p, a):
        pm, am = self._mat(p), self._mat(a)
        # tangent space at p is p * {skew}; project via skew(p^T a)
        b = np.swapaxes(pm, -1, -2) @ am
        skew = 0.5 * (b - np.swapaxes(b, -1, -2))
        return self._vec(pm @ skew)

    def dproj_bilinear(self, p, u, w):
        pm, um, wm = self._mat(p), self._mat(u), self._mat(w)
        # <u, P(p) w>_F = (<u, w> - tr(u^T p w^T p)) / 2
        g = um @ np.swapaxes(pm, -1, -2) @ wm + wm @ np.swapaxes(pm, -1, -2) @ um
        return self._vec(-0.5 * g)

    @staticmethod
    def _expm_skew(omega):
        """Rodrigues formula for batched 3x3 skew matrices."""
        theta = np.linalg.norm(omega, axis=(-2, -1)) / np.sqrt(2.0)
        t = theta[..., None, None]
        eye = np.broadcast_to(np.eye(3), omega.shape)
        with np.errstate(invalid="ignore", divide="ignore"):
            a = np.where(t > 1e-8, np.sin(t) / np.where(t > 0, t, 1.0), 1.0 - t * t / 6.0)
            b = np.where(t > 1e-8, (1.0 - np.cos(t)) / np.where(t > 0, t * t, 1.0),
                         0.5 - t * t / 24.0)
        return eye + a * omega + b * (omega @ omega)

    def exp(self, p, v):
        pm = self._mat(p)
        om = np.swapaxes(pm, -1, -2) @ self._mat(v)
        om = 0.5 * (om - np.swapaxes(om, -1, -2))
        return self.canonicalize(self._vec(pm @ self._expm_skew(om)))

    @staticmethod
    def _rotation_angle(r):
        """Rotation angle of relative rotations r, atan2-stable near 0."""
        cos = (np.trace(r, axis1=-2, axis2=-1) - 1.0) / 2.0
        s = 0.5 * (r - np.swapaxes(r, -1, -2))
        sin = np.linalg.norm(s, axis=(-2, -1)) / np.sqrt(2.0)
        return np.arctan2(np.minimum(sin, 1.0), np.clip(cos, -1.0, 1.0))

    def _rel_rotation_log(self, p, q):
        """Skew matrix Omega with p expm(Omega) = q; raises near the cut locus."""
        pm, qm = self._mat(p), self._mat(q)
        r = np.swapaxes(pm, -1, -2) @ qm
        theta = self._rotation_angle(r)
        if np.any(theta >= np.pi - CUT_LOCUS_TOL):
            raise CutLocusError("so3 log: rotation angle is (nearly) pi")
        s = 0.5 * (r - np.swapaxes(r, -1, -2))
        t = theta[..., None, None]
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where(t > 1e-8, t / np.where(t > 0, np.sin(t), 1.0), 1.0 + t * t / 6.0)
        return scale * s, theta

    def log(self, p, q):
        om, _ = self._rel_rotation_log(p, q)
        return self._vec(self._mat(p) @ om)

    def dist(self, p, q):
        pm, qm = self._mat(p), self._mat(q)
        r = np.swapaxes(pm, -1, -2) @ qm
        return np.sqrt(2.0) * self._rotation_angle(r)

    def transport(self, p, q, u):
        om, _ = self._rel_rotation_log(p, q)
        h = self._expm_skew(0.5 * om)
        pm = self._mat(p)
        body = np.swapaxes(pm, -1, -2) @ self._mat(u)
        body = 0.5 * (body - np.swapaxes(body, -1, -2))
        return self._vec(pm @ h @ body @ h)


def make_manifold(spec: str) -> Manifold:
    """Build a manifold from its string id: euclidean:d, sphere:d, torus:d, so3."""
    s = str(spec).strip().lower()
    if s == "so3":
        return SO3()
    if ":" in s:
        kind, _, d = s.partition(":")
        try:
            dim = int(d)
        except ValueError:
            raise ConfigError(f"bad manifold dimension in {spec!r}")
        if kind == "euclidean":
            return Euclidean(dim)
        if kind == "sphere":
            return Sphere(dim)
        if kind == "torus":
            return Torus(dim)
    raise ConfigError(f"unknown manifold id {spec!r} "
                      "(expected euclidean:d, sphere:d, torus:d or so3)")


# ---------------------------------------------------------------------------
# Typed point/vector wrappers
# ---------------------------------------------------------------------------

_POINT_TOL = 1e-6   # reject coords farther than this from the manifold
_INVARIANT_TOL = 1e-12


@dataclass(frozen=True)
class ManifoldPoint:
    """A point on a manifold; coords are canonicalized at construction."""

    manifold: Manifold
    coords: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coords, float)
        if c.shape != (self.manifold.ambient_dim,):
            raise UsageError(f"point coords must have shape ({self.manifold.ambient_dim},)")
        if self.manifold.constraint_residual(c) > _POINT_TOL:
            raise UsageError(f"coords are not on {self.manifold.name} "
                             f"(residual {float(self.manifold.constraint_residual(c)):.2e})")
        object.__setattr__(self, "coords", self.manifold.canonicalize(c))

    def residual(self) -> float:
        return float(self.manifold.constraint_residual(self.coords))


@dataclass(frozen=True)
class TangentVector:
    """A tangent vector at a base point; components projected at construction."""

    base: ManifoldPoint
    components: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.components, float)
        if v.shape != (self.base.manifold.ambient_dim,):
            raise UsageError("tangent components have the wrong ambient dimension")
        proj = self.base.manifold.project_tangent(self.base.coords, v)
        if np.linalg.norm(proj - v) > _POINT_TOL * (1.0 + np.linalg.norm(v)):
            raise UsageError("components do not lie in the tangent space at base")
        object.__setattr__(self, "components", proj)

    @property
    def manifold(self) -> Manifold:
        return self.base.manifold

    def norm(self) -> float:
        return float(np.linalg.norm(self.components))


def _same_base(u: TangentVector, v: TangentVector) -> None:
    if u.base.manifold is not v.base.manifold or \
            np.max(np.abs(u.base.coords - v.base.coords)) > _INVARIANT_TOL * 1e3:
        raise UsageError("tangent vectors are based at different points")


def inner(p: ManifoldPoint, u: TangentVector, v: TangentVector) -> float:
    """Riemannian inner product g(p)(u, v) (the ambient dot product)."""
    _same_base(u, v)
    if np.max(np.abs(u.base.coords - p.coords)) > _INVARIANT_TOL * 1e3:
        raise UsageError("vectors are not based at p")
    return float(np.dot(u.components, v.components))


def exp(p: ManifoldPoint, v: TangentVector) -> ManifoldPoint:
    """Exponential map: endpoint of the geodesic from p with initial velocity v."""
    _same_base(v, v)
    if v.base is not p and np.max(np.abs(v.base.coords - p.coords)) > _INVARIANT_TOL * 1e3:
        raise UsageError("v is not based at p")
    m = p.manifold
    return ManifoldPoint(m, m.exp(p.coords, v.components))


def log(p: ManifoldPoint, q: ManifoldPoint) -> TangentVector:
    """Inverse exponential; the returned vector has norm dist(p, q)."""
    if p.manifold is not q.manifold:
        raise UsageError("points live on different manifolds")
    return TangentVector(p, p.manifold.log(p.coords, q.coords))


def dist(p: ManifoldPoint, q: ManifoldPoint) -> float:
    if p.manifold is not q.manifold:
        raise UsageError("points live on different manifolds")
    return float(p.manifold.dist(p.coords, q.coords))


def transport(p: ManifoldPoint, q: ManifoldPoint, u: TangentVector) -> TangentVector:
    """Parallel transport of u from p to q along the minimal geodesic."""
    if np.max(np.abs(u.base.coords - p.coords)) > _INVARIANT_TOL * 1e3:
        raise UsageError("u is not based at p")
    m = p.manifold
    return TangentVector(q, m.transport(p.coords, q.coords, u.components))


def project_tangent(p: ManifoldPoint, a: np.ndarray) -> TangentVector:
    """Orthogonal projection of an arbitrary ambient vector onto T_p M."""
    return TangentVector(p, p.manifold.project_tangent(p.coords, np.asarray(a, float)))
