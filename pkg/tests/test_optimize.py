import numpy as np
import pytest

from varcurves import (ConstraintSet, DiscreteCurve, FunctionalSpec, SolveOptions,
                       evaluate_family, geodesic, hermite_cubic, impose, length,
                       make_manifold, minimize, multistart, ps_diagnostics, seed,
                       sup_distance, tension_1d)


def hermite_setup(n=200):
    c = ConstraintSet.clamped([0.0], [1.0], [0.0], [0.0])
    m = make_manifold("euclidean:1")
    return FunctionalSpec.tension_cost(0.0), c, seed(c, m, n)


def test_critical_start_converges_immediately():
    m = make_manifold("sphere:2")
    p = m.random_point(np.random.default_rng(0), 1)[0]
    c = ConstraintSet.clamped(p, p)
    x0 = impose(c, DiscreteCurve(m, "interval", np.tile(m.canonicalize(p), (21, 1))))
    rep = minimize(FunctionalSpec.conditional(2), c, x0)
    assert rep.verdict == "converged"
    assert rep.iterations <= 1
    assert np.array_equal(rep.minimizer.samples, x0.samples)


def test_hermite_solve_matches_oracle():
    spec, c, x0 = hermite_setup()
    rep = minimize(spec, c, x0)
    assert rep.verdict == "converged"
    oracle = hermite_cubic(0.0, 0.0, 1.0, 0.0)
    assert sup_distance(rep.minimizer, oracle.sample(200)) <= 5e-3
    assert abs(rep.final_objective - 6.0) / 6.0 <= 0.01


def test_circle_multistart_three_classes():
    m = make_manifold("torus:1")
    c = ConstraintSet.interpolation([(0.0, [0.0]), (1.0, [np.pi / 2])])
    spec = FunctionalSpec.tension_cost(1.0)
    seeds = [(seed(c, m, 100, hint=[w]), f"w={w}") for w in (-1, 0, 1)]
    res = multistart(spec, c, seeds)
    assert res.n_clusters == 3
    for rep, w in zip(res.reports, (-1, 0, 1)):
        target = 0.5 * (np.pi / 2 + 2 * np.pi * w) ** 2
        assert rep.verdict == "converged"
        assert abs(rep.final_objective - target) / target <= 0.01
        assert rep.winding_drift < 1e-9
    off_diag = res.sup_distance[np.triu_indices(3, 1)]
    assert np.all(off_diag > 1.0)
    assert np.all(np.isfinite(res.h2_distance))


def test_identical_seeds_one_cluster():
    m = make_manifold("torus:1")
    c = ConstraintSet.interpolation([(0.0, [0.0]), (1.0, [np.pi / 2])])
    spec = FunctionalSpec.tension_cost(1.0)
    s = seed(c, m, 50, hint=[0])
    res = multistart(spec, c, [(s, "a"), (s, "b")])
    assert res.n_clusters == 1


def test_torus_loop_hints_two_clusters_distinct_winding():
    from varcurves import winding_vector
    m = make_manifold("torus:2")
    knots = [(0.0, [0.0, 0.0]), (0.5, [np.pi / 2, np.pi / 2]), (1.0, [0.0, 0.0])]
    c = ConstraintSet.interpolation(knots)
    spec = FunctionalSpec.tension_cost(1.0)
    seeds = [(seed(c, m, 80, hint=h), str(h)) for h in ([0, 0], [1, 0])]
    res = multistart(spec, c, seeds)
    assert res.n_clusters == 2
    w0 = winding_vector(res.reports[0].minimizer)
    w1 = winding_vector(res.reports[1].minimizer)
    assert np.allclose(w1 - w0, [1.0, 0.0], atol=1e-9)
    for rep in res.reports:
        assert rep.winding_drift < 1e-9


# -- report invariants ------------------------------------------------------------------

def test_monotone_descent_and_certificate():
    c = ConstraintSet.clamped([0.0], [1.0], [2.0], [-1.0])
    m = make_manifold("euclidean:1")
    spec = FunctionalSpec.tension_cost(1.5)
    rep = minimize(spec, c, seed(c, m, 100))
    objs = [h.objective for h in rep.history]
    assert all(b <= a for a, b in zip(objs, objs[1:]))
    assert rep.verdict == "converged"
    assert rep.final_residual <= SolveOptions().grad_tol


def test_fixed_samples_bit_identical():
    m = make_manifold("sphere:2")
    c = ConstraintSet.clamped([1, 0, 0], [0, 1, 0], [0, 1.0, 0], [0.5, 0, 0.1])
    x0 = impose(c, seed(c, m, 60))
    rep = minimize(FunctionalSpec.tension_cost(0.5), c, x0)
    for j in (0, 1, -2, -1):
        assert np.array_equal(rep.minimizer.samples[j], x0.samples[j])


def test_determinism():
    spec, c, x0 = hermite_setup(100)
    r1 = minimize(spec, c, x0)
    r2 = minimize(spec, c, x0)
    assert r1.to_dict() == r2.to_dict()
    assert np.array_equal(r1.minimizer.samples, r2.minimizer.samples)


def test_iter_limit_verdict_on_zero_budget():
    c = ConstraintSet.clamped([0.0], [1.0], [2.0], [-1.0])
    m = make_manifold("euclidean:1")
    rep = minimize(FunctionalSpec.tension_cost(1.0), c, seed(c, m, 60),
                   SolveOptions(max_iters=0))
    assert rep.verdict == "iter_limit"


def test_history_records_have_diagnostics():
    spec, c, x0 = hermite_setup(100)
    rep = minimize(spec, c, x0)
    h = rep.history[-1]
    assert h.grad_norm == rep.final_residual
    assert h.length > 0 and h.quad_length > 0 and h.sup_velocity > 0


# -- compactness diagnostics ----------------------------------------------------------------

def test_ps_domination_holds_on_tension_runs():
    m = make_manifold("torus:1")
    c = ConstraintSet.interpolation([(0.0, [0.0]), (1.0, [np.pi / 2])])
    spec = FunctionalSpec.tension_cost(2.0)
    rep = minimize(spec, c, seed(c, m, 100, hint=[1]))
    ps = ps_diagnostics(rep)
    assert ps.domination_checked and ps.domination_ok
    assert ps.domination_margin_min >= -1e-9


def test_ps_failure_witness_family():
    m = make_manifold("sphere:2")
    c = ConstraintSet.clamped([1, 0, 0], [0, 1, 0])
    family = [geodesic(m, [1, 0, 0], [0, 1, 0], winding=i).sample(400) for i in (1, 2, 3)]
    rep = evaluate_family(FunctionalSpec.tension_cost(0.0), c, family)
    objs = [h.objective for h in rep.history]
    lens = [h.length for h in rep.history]
    assert max(objs) <= 1e-2                       # bounded objective
    assert all(b - a >= 2 * np.pi - 1e-9 for a, b in zip(lens, lens[1:]))  # unbounded length
    sups = [sup_distance(a, b) for i, a in enumerate(family) for b in family[i + 1:]]
    assert min(sups) >= 1.0                        # no clustering
    ps = ps_diagnostics(rep)
    assert not ps.domination_checked               # tau = 0: nothing to dominate


def test_ps_constant_run_zero_lengths():
    m = make_manifold("euclidean:2")
    p = np.zeros(2)
    c = ConstraintSet.clamped(p, p)
    x0 = DiscreteCurve(m, "interval", np.zeros((31, 2)))
    rep = minimize(FunctionalSpec.tension_cost(1.0), c, x0)
    ps = ps_diagnostics(rep)
    assert ps.length_max == 0.0


def test_tension_solve_against_ode_oracle():
    c = ConstraintSet.clamped([0.0], [1.0], [0.0], [0.0])
    m = make_manifold("euclidean:1")
    for tau in (1.0, 5.0):
        rep = minimize(FunctionalSpec.tension_cost(tau), c, seed(c, m, 200))
        oracle = tension_1d([0.0], [1.0], tau, "clamped", [0.0], [0.0])
        assert sup_distance(rep.minimizer, oracle.sample(200)) <= 1e-2
