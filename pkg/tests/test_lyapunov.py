import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from latwalk.lattice import LatticePoint, hermite_bound
from latwalk.lyapunov import (GrowthProfile, LyapunovSpec, NoContraction, calibrated_epsilon, drift_holds,
                              escape_profile, estimate_drift, evaluate_V, fit_contraction, lift_multistep,
                              probe_points, recurrence_experiment, sublevel_sample, sweep_contraction)
from latwalk.presets import conjugated_pair, simmons_weiss, unipotent_pair
from latwalk.walk import StepMeasure

Z2 = LatticePoint.standard(2)
IDENTITY_WALK = StepMeasure.dirac(np.eye(2))


def worst_direction_ratio(mu, n0, delta, grid=2001):
    """max over unit u of E |g_{n0} ... g_1 u|^-delta, by enumerating all words."""
    th = np.linspace(0, np.pi, grid)
    u = np.stack([np.cos(th), np.sin(th)])
    total = np.zeros(grid)
    for word in itertools.product(range(len(mu)), repeat=n0):
        m, p = np.eye(2), 1.0
        for i in word:
            m, p = mu.matrices[i] @ m, p * mu.weights[i]
        total += p * np.linalg.norm(m @ u, axis=0) ** -delta
    return total.max()


def exact_pi_power(mu, k, f, x):
    """(pi(mu)^k f)(x) by summing over all words of length k."""
    total = 0.0
    for word in itertools.product(range(len(mu)), repeat=k):
        m, p = np.eye(2), 1.0
        for i in word:
            m, p = mu.matrices[i] @ m, p * mu.weights[i]
        total += p * f(LatticePoint(m @ x.basis))
    return total


def test_V_examples():
    assert evaluate_V(LyapunovSpec(epsilon=1, delta=1), Z2) == 2
    x = LatticePoint(np.diag([4.0, 0.25]))
    assert evaluate_V(LyapunovSpec(epsilon=1, delta=2), x) == pytest.approx(17)
    assert evaluate_V(LyapunovSpec(epsilon=1e-15, delta=1), x) == pytest.approx(1)
    assert evaluate_V(LyapunovSpec(epsilon=0, delta=1), x) == 1


def test_multi_minima_variant():
    x = LatticePoint(np.diag([2.0, 2.0, 0.25]))
    spec = LyapunovSpec(epsilon=1, delta=1, multi_minima=True, dim=3)
    # lambda = (1/4, 2, 2): 1 + 4 + (1/2)^-1
    assert evaluate_V(spec, x) == pytest.approx(1 + 4 + 2)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 1.0), st.floats(1e-3, 1.0), st.floats(0.05, 3), st.floats(0.01, 10), st.floats(0.01, 10))
def test_V_monotone(l_small, frac, delta, eps1, eps2):
    l_big = l_small + frac * (1 - l_small)  # lambda_1 of diag(l, 1/l) is l for l <= 1
    a = LatticePoint(np.diag([l_small, 1 / l_small]))
    b = LatticePoint(np.diag([l_big, 1 / l_big]))
    spec = LyapunovSpec(epsilon=eps1, delta=delta)
    assert evaluate_V(spec, a) >= evaluate_V(spec, b)
    lo, hi = sorted([eps1, eps2])
    assert evaluate_V(LyapunovSpec(epsilon=lo, delta=delta), a) <= evaluate_V(LyapunovSpec(epsilon=hi, delta=delta), a)


def test_spec_constants():
    s = LyapunovSpec(alpha=0.3, beta=2.0)
    assert abs(s.B - 2.0 / 0.7) <= 1e-12
    with pytest.raises(ValueError):
        LyapunovSpec(alpha=1.0, beta=1.0)
    with pytest.raises(ValueError):
        LyapunovSpec(delta=0)
    with pytest.raises(ValueError):
        LyapunovSpec().B


def test_growth_profiles():
    n = np.arange(0, 50)
    for phi in (GrowthProfile("constant", 1), GrowthProfile("polynomial", 2), GrowthProfile("exponential", 0.1)):
        assert np.all(phi(n) >= 1)
    assert GrowthProfile("polynomial", 2)(7) == 49
    assert GrowthProfile("polynomial", 3).exponent == 0
    assert GrowthProfile("exponential", 0.1).exponent == 0.1
    with pytest.raises(ValueError):
        GrowthProfile("factorial")


def test_drift_trivial_cases():
    x = LatticePoint(np.diag([3.0, 1 / 3]))
    spec = LyapunovSpec(epsilon=2, delta=0.5, n0=3)
    assert estimate_drift(IDENTITY_WALK, spec, x, 100, 1) == (evaluate_V(spec, x), 0.0)
    assert estimate_drift(conjugated_pair(), LyapunovSpec(epsilon=0), x, 100, 1) == (1.0, 0.0)
    m, _ = estimate_drift(unipotent_pair(), LyapunovSpec(epsilon=1, delta=0.5, n0=4), Z2, 500, 1)
    assert m >= 1


def test_drift_matches_exact_average():
    mu = simmons_weiss()
    spec = LyapunovSpec(epsilon=1, delta=0.5, n0=3)
    x = LatticePoint(np.array([[0.3, 0.2], [0.1, 0.3 / 0.3 * 1.0]]) / math.sqrt(0.3 - 0.02))
    exact = exact_pi_power(mu, 3, lambda y: evaluate_V(spec, y), x)
    m, se = estimate_drift(mu, spec, x, 40_000, 4)
    assert abs(m - exact) <= 3 * se


def test_identity_walk_never_contracts():
    spec = LyapunovSpec(epsilon=1, delta=0.5)
    fit = fit_contraction(IDENTITY_WALK, spec, probe_points(spec, 12, 300.0, 1), 50, 2)
    assert fit.alpha >= 1 or fit.tail_ratio >= 1
    assert not fit.contracting
    with pytest.raises(NoContraction):
        fit.fitted_spec()


def test_one_step_simmons_weiss_does_not_contract():
    """The exact worst-direction ratio exceeds 1 at one step, so no (alpha, beta) exists
    for large V; the fit must report that."""
    mu = simmons_weiss()
    assert worst_direction_ratio(mu, 1, 0.5) > 1.2
    spec = LyapunovSpec(epsilon=calibrated_epsilon(0.5), delta=0.5, n0=1)
    fit = fit_contraction(mu, spec, probe_points(spec, 50, 1e3, 7), 10_000, 3)
    assert not fit.contracting and fit.tail_ratio > 1


def test_multi_step_simmons_weiss_contracts():
    mu = simmons_weiss()
    assert worst_direction_ratio(mu, 5, 0.5) < 0.9
    spec = LyapunovSpec(epsilon=calibrated_epsilon(0.5), delta=0.5, n0=5)
    fit = fit_contraction(mu, spec, probe_points(spec, 50, 1e3, 7), 10_000, 3)
    assert fit.contracting and fit.alpha < 1


def test_conjugated_walk_sweep_finds_contraction():
    mu = conjugated_pair()
    res = sweep_contraction(mu, lambda s: probe_points(s, 50, 1e3, 7), 10_000, 11, deltas=(0.25,))
    assert res.found
    fit = res.fit
    assert fit.alpha < 1 and fit.tail_ratio < 1
    assert worst_direction_ratio(mu, fit.spec.n0, 0.25) < 1
    spec = fit.fitted_spec()
    fresh = probe_points(spec, 30, 1e3, 99)
    assert drift_holds(mu, spec, fresh, 10_000, 5).mean() >= 0.95


def test_lift_trivial_cases():
    spec = LyapunovSpec(epsilon=1, delta=0.5, n0=1, alpha=0.5, beta=1.0)
    x = LatticePoint(np.diag([5.0, 0.2]))
    assert lift_multistep(spec, conjugated_pair(), 100, 1)(x) == evaluate_V(spec, x)
    spec3 = LyapunovSpec(epsilon=1, delta=0.5, n0=3, alpha=0.5, beta=1.0)
    V = lift_multistep(spec3, IDENTITY_WALK, 10, 1)
    assert V(x) == pytest.approx(evaluate_V(spec3, x) * sum(0.5 ** ((2 - k) / 3) for k in range(3)))
    with pytest.raises(ValueError):
        lift_multistep(LyapunovSpec(n0=2), IDENTITY_WALK, 10, 1)


def test_lift_one_step_drift_identity():
    """pi V - alpha^(1/n0) V = pi^n0 V' - alpha V' for the lifted V, evaluated exactly
    by word enumeration; with the n0-step drift bound this gives the one-step bound."""
    mu = simmons_weiss()
    n0 = 5
    spec = LyapunovSpec(epsilon=1.0, delta=0.5, n0=n0)
    fit = fit_contraction(mu, spec, probe_points(spec, 40, 300.0, 7), 10_000, 3)
    spec = fit.fitted_spec()
    alpha, beta = spec.alpha, spec.beta
    Vp = lambda y: evaluate_V(spec, y)  # noqa: E731
    coef = lift_multistep(spec, mu, 10, 1).coefficients

    def V_exact(y):
        return sum(c * exact_pi_power(mu, k, Vp, y) for k, c in enumerate(coef))

    for x in probe_points(spec, 4, 200.0, 13):
        lhs = exact_pi_power(mu, 1, V_exact, x) - alpha ** (1 / n0) * V_exact(x)
        rhs = exact_pi_power(mu, n0, Vp, x) - alpha * Vp(x)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)
        assert lhs <= 1.05 * beta  # one-step bound inherited from the n0-step one
    # Monte-Carlo evaluator agrees with the exact sum
    x = probe_points(spec, 1, 50.0, 21)[0]
    V_mc = lift_multistep(spec, mu, 40_000, 5)
    assert V_mc(x) == pytest.approx(V_exact(x), rel=0.02)


def test_sublevel_sample_examples():
    spec = LyapunovSpec(epsilon=1, delta=1)
    assert sublevel_sample(spec, 10.0, 0, 1) == []
    pts = sublevel_sample(spec, 101.0, 20, 3)
    lam = np.array([p.lambda1 for p in pts])
    assert np.all(lam >= 1 / 100 - 1e-12) and np.all(lam <= 1 / 49.5 + 1e-12)
    vz = evaluate_V(spec, Z2)
    pts = sublevel_sample(spec, vz, 5, 3)
    assert all(abs(evaluate_V(spec, p) - vz) <= vz / 2 for p in pts)
    with pytest.raises(ValueError):
        sublevel_sample(spec, 1.5, 3, 1)
    assert spec.floor == pytest.approx(1 + hermite_bound(2) ** -1)


def test_recurrence_trivial_threshold():
    spec = LyapunovSpec(epsilon=1, delta=0.5, n0=1, alpha=0.5, beta=5.0)
    # tol tiny relative to 2B / min V: M covers every reachable point in the table
    rr = recurrence_experiment(conjugated_pair(), spec, GrowthProfile("constant", 3.0), 1e-6,
                               [3], 500, 1, points_per_level=2)
    assert all(r.escape == 0 and r.cesaro_escape == 0 for r in rr.rows)


def test_recurrence_from_center():
    mu = conjugated_pair()
    spec = LyapunovSpec(epsilon=calibrated_epsilon(0.5), delta=0.5)
    fit = sweep_contraction(mu, lambda s: probe_points(s, 40, 1e3, 7), 10_000, 11, deltas=(0.5,),
                            target=0.6).fit
    spec = fit.fitted_spec()
    rr = recurrence_experiment(mu, spec, GrowthProfile("constant", spec.floor * 1.05), 0.1, [5, 10],
                               5_000, 2, points_per_level=2)
    for r in rr.rows:
        assert r.escape <= 0.1 + 3 * r.escape_se
    assert rr.n0_pointwise is not None


def test_escape_profile_is_tight():
    mu = conjugated_pair()
    spec = LyapunovSpec(epsilon=1, delta=0.5)
    starts = [Z2, LatticePoint(np.diag([3.0, 1 / 3]))]
    prof = escape_profile(mu, spec, starts, [2.0, 5.0, 20.0, 200.0], [5, 10, 20], 5_000, 1)
    assert np.all(np.diff(prof) <= 0)
    assert prof[-1] <= 0.01
