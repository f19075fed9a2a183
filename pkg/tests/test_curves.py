import numpy as np
import pytest

from varcurves import (DegenerateCurveError, DiscreteCurve, TangentField, UsageError,
                       covariant_accel, dump_curve, equicontinuity_ratio, geodesic,
                       length, make_manifold, parse_curve, quadrature_length,
                       sobolev_norm_sq, sup_norm, velocity, winding_vector)
from varcurves.checks import _random_curve


def euclid_curve(fn, n=100, dim=1):
    m = make_manifold(f"euclidean:{dim}")
    t = np.arange(n + 1) / n
    x = np.atleast_2d(fn(t))
    if x.shape[0] != n + 1:
        x = x.T
    return DiscreteCurve(m, "interval", x)


# -- velocity ------------------------------------------------------------------

def test_velocity_constant_curve_is_zero():
    c = euclid_curve(lambda t: np.stack([np.ones_like(t), 2 * np.ones_like(t)]), dim=2)
    assert np.allclose(velocity(c).vectors, 0.0, atol=1e-12)


def test_velocity_exact_on_affine_data():
    c = euclid_curve(lambda t: np.stack([t, np.zeros_like(t)]), dim=2)
    v = velocity(c).vectors
    assert np.allclose(v, np.array([1.0, 0.0]), atol=1e-12)


def test_velocity_sphere_great_circle_speed():
    m = make_manifold("sphere:2")
    cf = geodesic(m, [1, 0, 0], [0, 1, 0])
    c = cf.sample(100)
    speeds = np.linalg.norm(velocity(c).vectors, axis=1)
    assert np.max(np.abs(speeds - np.pi / 2)) < 1e-3


# -- covariant acceleration -------------------------------------------------------

def test_accel_exact_on_quadratic():
    c = euclid_curve(lambda t: np.stack([t**2, np.zeros_like(t)]), dim=2)
    a = covariant_accel(c).vectors[1:-1]
    assert np.allclose(a, np.array([2.0, 0.0]), atol=1e-9)


def test_accel_geodesic_small_under_refinement():
    m = make_manifold("sphere:2")
    cf = geodesic(m, [1, 0, 0], [0, 1, 0])
    peak = {}
    for n in (50, 100, 200, 400):
        a = covariant_accel(cf.sample(n)).vectors
        peak[n] = np.max(np.linalg.norm(a, axis=1))
    assert peak[100] <= 2e-2 * (np.pi / 2) ** 2
    ns = np.array([50, 100, 200, 400], float)
    errs = np.array([max(peak[int(n)], 1e-16) for n in ns])
    order = -np.polyfit(np.log(ns), np.log(errs), 1)[0]
    # great-circle second differences are radial, so the projection removes them
    # entirely: either a genuine O(N^-2) decay or a plain roundoff floor
    assert order >= 1.8 or peak[400] < 1e-8


def test_accel_second_order_against_latitude_circle():
    # a latitude circle has constant covariant acceleration norm w^2 sin(a) cos(a);
    # measures the true stencil convergence rate (the geodesic case is exact)
    m = make_manifold("sphere:2")
    alpha, w = 0.8, 2 * np.pi
    errs = []
    grids = (50, 100, 200, 400)
    for n in grids:
        t = np.arange(n + 1) / n
        x = np.stack([np.full(n + 1, np.cos(alpha)),
                      np.sin(alpha) * np.cos(w * t),
                      np.sin(alpha) * np.sin(w * t)], axis=1)
        c = DiscreteCurve(m, "interval", x)
        norms = np.linalg.norm(covariant_accel(c).vectors[1:-1], axis=1)
        errs.append(np.max(np.abs(norms - w**2 * np.sin(alpha) * np.cos(alpha))))
    order = -np.polyfit(np.log(grids), np.log(errs), 1)[0]
    assert order >= 1.8


def test_accel_circle_full_wrap_is_zero():
    m = make_manifold("torus:1")
    n = 100
    theta = (2 * np.pi * np.arange(n + 1) / n) % (2 * np.pi)
    c = DiscreteCurve(m, "interval", theta[:, None])
    assert np.allclose(covariant_accel(c).vectors[1:-1], 0.0, atol=1e-10)


# -- norms -------------------------------------------------------------------------

def test_sobolev_norm_zero_field():
    c = euclid_curve(lambda t: t)
    z = TangentField(c, np.zeros_like(c.samples))
    for k in (0, 1, 2):
        assert sobolev_norm_sq(z, k) == 0.0


def test_sobolev_norm_constant_unit_field():
    c = euclid_curve(lambda t: t)
    f = TangentField(c, np.ones_like(c.samples))
    assert sobolev_norm_sq(f, 0) == pytest.approx(1.0, abs=1e-12)


def test_sobolev_norm_sine_field():
    c = euclid_curve(lambda t: t, n=100)
    f = TangentField(c, np.sin(np.pi * c.times)[:, None])
    assert sobolev_norm_sq(f, 0) == pytest.approx(0.5, abs=1e-3)


def test_sobolev_monotone_under_domination():
    c = euclid_curve(lambda t: t, n=50)
    rng = np.random.default_rng(0)
    f = rng.normal(size=c.samples.shape)
    g = f * rng.uniform(0.0, 1.0, size=(c.n_samples, 1))
    assert sobolev_norm_sq(TangentField(c, g), 0) <= sobolev_norm_sq(TangentField(c, f), 0)


def test_sup_norm_examples():
    c = euclid_curve(lambda t: t, n=100)
    assert sup_norm(TangentField(c, np.zeros_like(c.samples)), 0) == 0.0
    assert sup_norm(TangentField(c, np.ones_like(c.samples)), 0) == pytest.approx(1.0)
    f = TangentField(c, np.sin(np.pi * c.times)[:, None])
    assert sup_norm(f, 0) == pytest.approx(1.0, abs=1e-3)


def test_sobolev_rejects_high_order():
    c = euclid_curve(lambda t: t)
    f = TangentField(c, np.zeros_like(c.samples))
    with pytest.raises(UsageError):
        sobolev_norm_sq(f, 3)


# -- length --------------------------------------------------------------------------

def test_length_constant_curve():
    c = euclid_curve(lambda t: np.ones_like(t))
    assert length(c) == 0.0


def test_length_quarter_great_circle():
    m = make_manifold("sphere:2")
    c = geodesic(m, [1, 0, 0], [0, 1, 0]).sample(100)
    assert length(c) == pytest.approx(np.pi / 2, abs=1e-4)


def test_length_circle_wrapped_exact():
    m = make_manifold("torus:1")
    for w in (1, 2, 3):
        c = geodesic(m, [0.0], [0.0], winding=w).sample(200)
        assert length(c) == pytest.approx(2 * np.pi * w, abs=1e-9)


def test_length_dominates_endpoint_distance():
    rng = np.random.default_rng(1)
    for mid in ("euclidean:2", "sphere:2"):
        m = make_manifold(mid)
        c = _random_curve(m, rng)
        assert length(c) >= float(m.dist(c.samples[0], c.samples[-1])) - 1e-12


# -- quadrature length and Hoelder diagnostic ------------------------------------------

def test_quadrature_length_cauchy_schwarz():
    rng = np.random.default_rng(2)
    for mid in ("euclidean:2", "sphere:2", "torus:2", "so3"):
        m = make_manifold(mid)
        for _ in range(5):
            c = _random_curve(m, rng)
            ql = quadrature_length(c)
            assert ql * ql <= sobolev_norm_sq(velocity(c), 0) + 1e-12


def test_equicontinuity_on_smooth_curves():
    rng = np.random.default_rng(3)
    for mid in ("euclidean:2", "sphere:2", "torus:2", "so3"):
        m = make_manifold(mid)
        c = _random_curve(m, rng)
        pairs = rng.integers(0, c.n_samples, size=(100, 2))
        assert equicontinuity_ratio(c, pairs) <= 1.0 + 1e-9


# -- winding -----------------------------------------------------------------------------

def test_winding_of_wrapped_lines():
    m = make_manifold("torus:1")
    for w in (-2, 0, 3):
        c = geodesic(m, [0.2], [0.2], winding=w).sample(50)
        assert winding_vector(c)[0] == pytest.approx(w, abs=1e-12)


# -- invariants / degeneracy ---------------------------------------------------------------

def test_min_grid_size_enforced():
    m = make_manifold("euclidean:1")
    with pytest.raises(UsageError):
        DiscreteCurve(m, "interval", np.zeros((4, 1)))  # N = 3 < 4


def test_degenerate_steps_carry_index():
    m = make_manifold("sphere:2")
    x = np.array([[1.0, 0, 0], [0.0, 1, 0], [-1.0, 0, 0], [0.0, -1, 0], [1.0, 0, 0],
                  [0.0, 1, 0]])
    x[2] = -x[1]  # samples 1 and 2 antipodal
    with pytest.raises(DegenerateCurveError) as err:
        DiscreteCurve(m, "interval", x)
    assert err.value.index == 1


def test_off_manifold_samples_rejected():
    m = make_manifold("sphere:2")
    x = np.tile([1.0, 0.0, 0.0], (6, 1))
    x[3] = [2.0, 0.0, 0.0]
    with pytest.raises(UsageError):
        DiscreteCurve(m, "interval", x)


# -- file round trip ----------------------------------------------------------------------

@pytest.mark.parametrize("mid,domain", [("euclidean:2", "interval"), ("sphere:2", "interval"),
                                        ("torus:1", "circle"), ("so3", "interval")])
def test_curve_file_bit_exact_roundtrip(mid, domain):
    rng = np.random.default_rng(4)
    m = make_manifold(mid)
    if domain == "circle":
        n = 16
        theta = (2 * np.pi * np.arange(n) / n)[:, None]
        c = DiscreteCurve(m, "circle", theta)
    else:
        c = _random_curve(m, rng)
    text = dump_curve(c)
    back = parse_curve(text)
    assert back.domain == c.domain
    assert back.manifold.name == c.manifold.name
    assert np.array_equal(back.samples, c.samples)
    assert dump_curve(back) == text
