import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from latwalk.equidist import (HaarSampler2D, SiegelObservable, equidistribution_report, exceedance_fractions,
                              haar_expectation, haar_mean, haar_sample_2d, siegel_count_2d, siegel_transform,
                              uniform_cesaro_experiment)
from latwalk.lattice import EnumerationBudgetExceeded, LatticePoint
from latwalk.lyapunov import GrowthProfile, LyapunovSpec, evaluate_V, sublevel_sample
from latwalk.rng import derive_key
from latwalk.presets import conjugated_pair, simmons_weiss, unipotent_pair
from latwalk.walk import cesaro_estimate, reduce_batch, residue_indicator

Z2 = LatticePoint.standard(2)


def brute_count(basis, r, box=30):
    d = basis.shape[0]
    c = np.array(list(itertools.product(range(-box, box + 1), repeat=d)))
    v = c @ basis.T
    n2 = np.einsum("ij,ij->i", v, v)
    return int(np.sum((n2 <= r * r * (1 + 1e-10)) & np.any(c != 0, axis=1)))


def random_lattice(rng, d=2, spread=0.7):
    m = rng.standard_normal((d, d)) * spread + np.eye(d)
    if np.linalg.det(m) < 0:
        m[:, 0] *= -1
    return LatticePoint(m / abs(np.linalg.det(m)) ** (1 / d))


def test_transform_examples():
    assert siegel_transform(SiegelObservable(1.5), Z2) == 8
    assert siegel_transform(SiegelObservable(1.0), Z2) == 4
    x = LatticePoint(np.diag([2.0, 0.5]))
    assert siegel_transform(SiegelObservable(0.49), x) == 0
    assert siegel_transform(SiegelObservable(1.5, dim=3), LatticePoint.standard(3)) == 18


def test_transform_matches_brute_force():
    rng = np.random.default_rng(4)
    for _ in range(60):
        x = random_lattice(rng)
        r = rng.uniform(0.3, 3.0)
        assert siegel_transform(SiegelObservable(r), x) == brute_count(x.reduced_basis, r)
    for _ in range(10):
        x = random_lattice(rng, 3, 0.4)
        r = rng.uniform(0.5, 2.0)
        assert siegel_transform(SiegelObservable(r, dim=3), x) == brute_count(x.reduced_basis, r, box=8)


def test_bump_matches_enumeration():
    rng = np.random.default_rng(5)
    obs = SiegelObservable(1.7, kind="bump")
    x = random_lattice(rng)
    c = np.array(list(itertools.product(range(-20, 21), repeat=2)))
    v = c @ x.reduced_basis.T
    n = np.linalg.norm(v, axis=1)
    expect = np.sum(obs.profile(n[n > 0]))
    assert siegel_transform(obs, x) == pytest.approx(expect, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 3.0), st.floats(0.0, 1.0))
def test_transform_monotone_in_radius(seed, r, extra):
    x = random_lattice(np.random.default_rng(seed))
    assert siegel_transform(SiegelObservable(r), x) <= siegel_transform(SiegelObservable(r + extra), x)


def test_enumeration_guard():
    x = LatticePoint(np.diag([1e-3, 1e-3, 1e6]))
    with pytest.raises(EnumerationBudgetExceeded):
        siegel_transform(SiegelObservable(2.0, dim=3), x)


def test_lebesgue_integrals():
    assert abs(SiegelObservable(1.3).lebesgue_integral - math.pi * 1.69) <= 1e-12
    assert abs(SiegelObservable(1.3, dim=3).lebesgue_integral - 4 / 3 * math.pi * 1.3**3) <= 1e-12
    assert haar_expectation(SiegelObservable(0.0)) == 0
    assert haar_expectation(SiegelObservable(1.1, scale=2.0)) == pytest.approx(2 * haar_expectation(SiegelObservable(1.1)))
    bump = SiegelObservable(1.4, kind="bump")
    r = 1.4
    cart, _ = integrate.dblquad(lambda y, x: float(bump.profile(math.hypot(x, y))), -r, r, -r, r,
                                epsabs=1e-11, epsrel=1e-11)
    assert bump.lebesgue_integral == pytest.approx(cart, rel=1e-7)


def test_sampler_draws_are_valid_and_indexed():
    s = HaarSampler2D(3)
    b = s.bases(0, 5000)
    assert np.all(np.abs(np.linalg.det(b) - 1) <= 1e-9)
    lam = [p.lambda1 for p in haar_sample_2d(s, 2000)]
    assert max(lam) ** 2 <= 2 / math.sqrt(3) + 1e-9
    assert np.array_equal(s.bases(100, 7), b[100:107])


def test_lambda1_squared_law_matches_quadrature():
    """Under Haar measure lambda_1^2 = 1/y on the fundamental domain with density 3 / (pi y^2)."""
    def cdf(t):
        # measure of {y >= 1/t} inside |x| <= 1/2, x^2 + y^2 >= 1
        val, _ = integrate.dblquad(lambda y, x: 3 / (math.pi * y * y), -0.5, 0.5,
                                   lambda x: max(1 / t, math.sqrt(1 - x * x)), lambda x: np.inf)
        return val
    assert cdf(2 / math.sqrt(3) + 1e-12) == pytest.approx(1.0, abs=1e-8)
    n = 200_000
    red = reduce_batch(HaarSampler2D(8).bases(0, n))
    lam2 = np.einsum("ij,ij->i", red[:, :, 0], red[:, :, 0])
    for t in (0.3, 0.6, 0.9, 1.0, 1.05, 1.1):
        p = cdf(t)
        emp = float(np.mean(lam2 <= t))
        assert abs(emp - p) <= 4 * math.sqrt(p * (1 - p) / n) + 1e-12
    assert cdf(0.5) == pytest.approx(3 * 0.5 / math.pi, rel=1e-8)


def test_sampler_mean_small():
    m, se = haar_mean(SiegelObservable(1.5), HaarSampler2D(12), 100_000)
    assert abs(m - 1.5**2 * math.pi) <= 3 * se


def test_batch_matches_pointwise():
    rng = np.random.default_rng(1)
    pts = [random_lattice(rng) for _ in range(30)]
    red = np.stack([p.reduced_basis for p in pts])
    obs = SiegelObservable(2.2)
    assert np.array_equal(obs(red), [siegel_transform(obs, p) for p in pts])
    assert np.array_equal(siegel_count_2d(red, 0.0), np.zeros(30))


def test_report_zero_profile():
    rep = equidistribution_report(conjugated_pair(), Z2, SiegelObservable(0.0), 10, 200, 1)
    assert np.all(rep.series.estimates == 0) and rep.first_below == 0


def test_report_finite_orbit_does_not_decay():
    ind = residue_indicator([np.eye(2)], 2)
    rep = equidistribution_report(unipotent_pair(), Z2, ind, 30, 20_000, 3, reference=1 / 6, modulus=2)
    assert np.all(np.abs(rep.series.estimates[1:]) >= 1 / 12)
    assert rep.first_below is None
    with pytest.raises(ValueError):
        equidistribution_report(unipotent_pair(), Z2, ind, 3, 10, 3, modulus=2)


def test_uniform_cesaro_single_point_matches_cesaro_estimate():
    mu = simmons_weiss()
    spec = LyapunovSpec(epsilon=1, delta=0.5)
    obs = SiegelObservable(1.2)
    level = spec.floor * 1.5
    tab = uniform_cesaro_experiment(mu, spec, GrowthProfile("constant", level), obs, [6], 1, 20_000, 4)
    assert len(tab.rows) == 1
    row = tab.rows[0]
    x = sublevel_sample(spec, level, 1, derive_key(4, "start", 6, 0))[0]
    assert row.start_V == pytest.approx(evaluate_V(spec, x), rel=1e-12)
    ref = cesaro_estimate(mu, 6, x, obs, 20_000, 99)
    assert abs(row.discrepancy - (ref.cesaro_mean - tab.reference)) <= 3 * math.hypot(row.std_error, ref.cesaro_std_error)


def test_uniform_cesaro_levels_cover_sublevel_set():
    spec = LyapunovSpec(epsilon=1, delta=0.5)
    tab = uniform_cesaro_experiment(simmons_weiss(), spec, GrowthProfile("polynomial", 1), SiegelObservable(1.2),
                                    [20], 2, 200, 1)
    vs = [r.start_V for r in tab.rows]
    assert max(vs) <= 20 and min(vs) >= spec.floor - 1e-12
    assert len({r.level for r in tab.rows}) >= 3


def test_exceedance_fraction_decreases():
    mu = conjugated_pair()
    starts = haar_sample_2d(HaarSampler2D(31), 200)
    frac = exceedance_fractions(mu, SiegelObservable(1.5), starts, [0, 3, 6, 10], 1_000, 2, rate=0.69, constant=1.0)
    assert frac[0] > 0.5
    assert np.all(np.diff(frac) <= 0.05) and frac[-1] < frac[0]
