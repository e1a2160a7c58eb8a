"""Equidistribution toward Haar measure.

Observables are Siegel transforms ``S f(x) = sum_{v in x, v != 0} f(v)`` of
radial profiles, whose Haar expectation is the Lebesgue integral of ``f``.
An independent sampler for Haar measure on the space of unimodular planar
lattices checks that identity, and the walk experiments compare empirical
averages with it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import gamma

from .lattice import EnumerationBudgetExceeded, LatticePoint, enumerate_short_vectors
from .lyapunov import GrowthProfile, LyapunovSpec, evaluate_V, sublevel_sample
from .rng import derive_key, uniforms
from .walk import (DEFAULT_CONFIG, DiscrepancySeries, WalkConfig, discrepancy_series,
                   reduce_batch, simulate)

__all__ = [
    "SiegelObservable",
    "HaarSampler2D",
    "EquidistributionReport",
    "UniformCesaroTable",
    "siegel_transform",
    "siegel_count_2d",
    "haar_expectation",
    "haar_sample_2d",
    "haar_bases_2d",
    "haar_mean",
    "noise_floor",
    "equidistribution_report",
    "uniform_cesaro_experiment",
    "exceedance_fractions",
]

RADIUS_GUARD = 1e3  # enumeration is refused beyond r / lambda_1 = 1e3
BOUNDARY_RTOL = 1e-10
NOISE_FLOOR_MULT = 5.0
_SQRT3_2 = math.sqrt(3.0) / 2.0


def ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / gamma(d / 2 + 1)


def _bump(rho, r):
    rho = np.asarray(rho, dtype=float)
    t = np.clip(rho / r, 0.0, 1.0) if r > 0 else np.ones_like(rho)
    with np.errstate(divide="ignore", over="ignore"):
        out = np.exp(1.0 - 1.0 / (1.0 - t * t))
    return np.where(t < 1.0, out, 0.0)


@dataclass(frozen=True)
class SiegelObservable:
    """Radial profile ``f(v) = scale * p(|v|)`` supported in the closed ball of radius ``radius``.

    ``kind`` is ``"indicator"`` (closed ball) or ``"bump"`` (the smooth bump
    ``exp(1 - 1/(1 - |v|^2/r^2))``).
    """

    radius: float
    dim: int = 2
    kind: str = "indicator"
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("indicator", "bump"):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if not (math.isfinite(self.radius) and self.radius >= 0):
            raise ValueError("radius must be finite and >= 0")
        if self.dim < 2:
            raise ValueError("dimension must be >= 2")

    def profile(self, norms) -> np.ndarray:
        norms = np.asarray(norms, dtype=float)
        if self.kind == "indicator":
            inside = norms <= self.radius * (1 + BOUNDARY_RTOL)
            return self.scale * inside.astype(float)
        return self.scale * _bump(norms, self.radius)

    @property
    def lebesgue_integral(self) -> float:
        d, r = self.dim, self.radius
        if r == 0:
            return 0.0
        if self.kind == "indicator":
            return self.scale * ball_volume(d) * r**d
        radial, _ = integrate.quad(lambda s: s ** (d - 1) * float(_bump(s, r)), 0.0, r,
                                   epsabs=0, epsrel=1e-12, limit=200)
        return self.scale * d * ball_volume(d) * radial

    def __call__(self, reduced: np.ndarray) -> np.ndarray:
        """Batch evaluation on reduced bases, shape ``(N, d, d)``."""
        reduced = np.asarray(reduced, dtype=float)
        if self.kind == "indicator" and reduced.shape[1] == 2:
            return self.scale * siegel_count_2d(reduced, self.radius)
        return np.array([siegel_transform(self, LatticePoint(b)) for b in reduced])


def siegel_count_2d(reduced: np.ndarray, radius: float) -> np.ndarray:
    """Nonzero lattice vectors in the closed disc of radius ``radius``, batched.

    Row ``b`` of the lattice (vectors ``a b1 + b b2``) meets the disc in the
    integers ``a`` with ``|a + b mu| |b1| <= sqrt(r^2 - b^2 |b2*|^2)``.  For a
    reduced unimodular basis ``|b2*| = 1/|b1| >= 0.93``, so only a few rows matter.
    """
    b1 = reduced[:, :, 0]
    b2 = reduced[:, :, 1]
    n1 = np.einsum("ij,ij->i", b1, b1)
    mu = np.einsum("ij,ij->i", b1, b2) / n1
    s2 = np.einsum("ij,ij->i", b2, b2) - mu * mu * n1
    r2 = radius * radius * (1 + BOUNDARY_RTOL)
    total = np.zeros(len(reduced))
    if radius <= 0:
        return total
    bmax = int(math.ceil(radius / math.sqrt(float(s2.min()))))
    for b in range(-bmax, bmax + 1):
        rem = r2 - b * b * s2
        ok = rem >= 0
        w = np.sqrt(np.where(ok, rem, 0.0) / n1)
        c = -b * mu
        cnt = np.floor(c + w) - np.ceil(c - w) + 1
        total += np.where(ok, np.maximum(cnt, 0.0), 0.0)
    return total - 1.0


def siegel_transform(obs: SiegelObservable, x: LatticePoint) -> float:
    """Sum of the profile over the nonzero vectors of ``x``."""
    if x.dim != obs.dim:
        raise ValueError("observable and lattice dimensions differ")
    if obs.radius == 0:
        return 0.0
    if obs.kind == "indicator" and x.dim == 2:
        return float(obs.scale * siegel_count_2d(x.reduced_basis[None], obs.radius)[0])
    if obs.radius > RADIUS_GUARD * x.lambda1:
        raise EnumerationBudgetExceeded(
            f"radius {obs.radius:g} exceeds 1e3 * lambda_1 = {RADIUS_GUARD * x.lambda1:g}")
    _, vecs = enumerate_short_vectors(x.reduced_basis, obs.radius)
    if len(vecs) == 0:
        return 0.0
    norms = np.linalg.norm(vecs, axis=1)
    norms = norms[norms > 0]
    return float(np.sum(obs.profile(norms)))


def haar_expectation(obs: SiegelObservable, d: int | None = None) -> float:
    """Haar average of the Siegel transform: the Lebesgue integral of the profile."""
    if d is not None and d != obs.dim:
        raise ValueError("dimension mismatch")
    return obs.lebesgue_integral


# ---------------------------------------------------------------------------
# Haar sampler for d = 2


@dataclass(frozen=True)
class HaarSampler2D:
    """Haar-random unimodular planar lattices; draw ``i`` depends only on ``(seed, i)``.

    A point ``z = x + iy`` of the standard fundamental domain is drawn from the
    hyperbolic area ``dx dy / y^2`` by rejection from the strip ``|x| <= 1/2,
    y >= sqrt(3)/2``; the lattice is ``rot(theta) [[y^-1/2, x y^-1/2], [0, y^1/2]] Z^2``
    with ``theta`` uniform on ``[0, pi)``.
    """

    seed: int

    def bases(self, start: int, count: int) -> np.ndarray:
        return haar_bases_2d(self.seed, start, count)


def haar_bases_2d(seed: int, start: int, count: int) -> np.ndarray:
    """Bases for draws ``start .. start + count - 1``."""
    key = derive_key(seed, "haar")
    idx = np.arange(start, start + count, dtype=np.uint64)
    x = np.empty(count)
    y = np.empty(count)
    pending = np.arange(count)
    attempt = 0
    while pending.size:
        if attempt > 10_000:
            raise RuntimeError("Haar rejection sampler did not finish")
        s = idx[pending]
        u = uniforms(key, s, 3 * attempt)
        v = uniforms(key, s, 3 * attempt + 1)
        xs = u - 0.5
        ys = _SQRT3_2 / (1.0 - v)  # density y^-2 on [sqrt(3)/2, inf)
        ok = xs * xs + ys * ys >= 1.0
        x[pending[ok]] = xs[ok]
        y[pending[ok]] = ys[ok]
        pending = pending[~ok]
        attempt += 1
    theta = np.pi * uniforms(key, idx, np.uint64(2**63))
    c, s = np.cos(theta), np.sin(theta)
    ry = 1.0 / np.sqrt(y)
    b = np.zeros((count, 2, 2))
    # rot @ [[ry, x ry], [0, 1/ry]]
    b[:, 0, 0] = c * ry
    b[:, 1, 0] = s * ry
    b[:, 0, 1] = c * x * ry - s / ry
    b[:, 1, 1] = s * x * ry + c / ry
    return b


def haar_sample_2d(sampler: HaarSampler2D, count: int, start: int = 0):
    return [LatticePoint(b) for b in sampler.bases(start, count)]


def haar_mean(obs: SiegelObservable, sampler: HaarSampler2D, count: int,
              chunk: int = 1 << 17) -> tuple[float, float]:
    """Empirical Haar mean of ``obs`` over ``count`` draws, with standard error."""
    total = total2 = 0.0
    for s in range(0, count, chunk):
        vals = obs(reduce_batch(sampler.bases(s, min(chunk, count - s))))
        total += math.fsum(vals)
        total2 += math.fsum(vals * vals)
    mean = total / count
    var = max(total2 / count - mean * mean, 0.0) * count / max(count - 1, 1)
    return mean, math.sqrt(var / count)


# ---------------------------------------------------------------------------
# walk experiments


def noise_floor(n_samples: int) -> float:
    return NOISE_FLOOR_MULT / math.sqrt(n_samples)


@dataclass
class EquidistributionReport:
    series: DiscrepancySeries
    noise_floor: float
    first_below: int | None

    @property
    def fit(self):
        return self.series.fit


def equidistribution_report(mu, x0, obs, n_max: int, n_samples: int, seed: int,
                            reference: float | None = None, modulus: int | None = None,
                            config: WalkConfig = DEFAULT_CONFIG) -> EquidistributionReport:
    """Discrepancy curve of ``obs`` along the walk from ``x0`` against its Haar value.

    ``obs`` is a :class:`SiegelObservable` or any batch observable together with
    an explicit ``reference`` value.
    """
    if reference is None:
        if not isinstance(obs, SiegelObservable):
            raise ValueError("a reference value is required for non-Siegel observables")
        reference = haar_expectation(obs)
    series = discrepancy_series(mu, x0, obs, reference, n_max, n_samples, seed, modulus, config)
    floor = noise_floor(n_samples)
    below = np.flatnonzero(np.abs(series.estimates) <= floor)
    return EquidistributionReport(series, floor, int(below[0]) if below.size else None)


@dataclass
class CesaroRow:
    n: int
    level: float
    point: int
    start_V: float
    discrepancy: float
    std_error: float


@dataclass
class UniformCesaroTable:
    rows: list
    reference: float
    meta: dict = field(default_factory=dict)

    def sup_by_n(self) -> dict:
        """n -> (sup |discrepancy|, std error of the maximizing row)."""
        out: dict = {}
        for r in self.rows:
            cur = out.get(r.n)
            if cur is None or abs(r.discrepancy) > cur[0]:
                out[r.n] = (abs(r.discrepancy), r.std_error)
        return out


def dyadic_levels(spec: LyapunovSpec, top: float) -> list:
    """``top, top/2, top/4, ...`` while the bracket ``[level/2, level]`` meets ``V >= floor``."""
    if top < spec.floor:
        raise ValueError(f"sublevel {top!r} lies below the attainable floor {spec.floor!r}")
    levels = [float(top)]
    while levels[-1] / 2.0 >= spec.floor:
        levels.append(levels[-1] / 2.0)
    return levels


def uniform_cesaro_experiment(mu, spec: LyapunovSpec, phi: GrowthProfile, obs: SiegelObservable,
                              n_list, points_per_level: int, n_samples: int, seed: int,
                              config: WalkConfig = DEFAULT_CONFIG) -> UniformCesaroTable:
    """Worst Cesaro discrepancy over starting points sampled from ``{V <= phi(n)}``.

    ``{V <= phi(n)}`` is covered by the dyadic brackets ``[L/2, L]`` with ``L = phi(n) 2^-j``;
    ``points_per_level`` points are drawn in each bracket.  For every point the
    Cesaro average over steps ``0..n-1`` is taken along each trajectory, so its
    standard error accounts for the correlation between steps.
    """
    if points_per_level < 1:
        raise ValueError("points_per_level must be >= 1")
    ref = haar_expectation(obs)
    rows = []
    for n in sorted(set(int(n) for n in n_list)):
        if n < 1:
            raise ValueError("n must be >= 1")
        for li, level in enumerate(dyadic_levels(spec, float(phi(n)))):
            starts = sublevel_sample(spec, level, points_per_level, derive_key(seed, "start", n, li),
                                     d=mu.dim)
            for j, x in enumerate(starts):
                key = derive_key(seed, "cesaro", n, li, j)
                vals = simulate(mu, x, range(n), n_samples, key, obs, config=config)
                avg = np.mean([vals[k] for k in range(n)], axis=0)
                se = float(avg.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
                rows.append(CesaroRow(n, level, j, evaluate_V(spec, x), float(avg.mean()) - ref, se))
    return UniformCesaroTable(rows, ref, {"layout": config.as_dict()})


def exceedance_fractions(mu, obs: SiegelObservable, starts, n_values, n_samples: int, seed: int,
                         rate: float, constant: float = 1.0,
                         config: WalkConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Fraction of starts with ``|D_n| > max(constant * rate^(n/2), 3 se)`` for each n."""
    ref = haar_expectation(obs)
    n_values = sorted(set(int(n) for n in n_values))
    hits = np.zeros(len(n_values))
    for i, x in enumerate(starts):
        vals = simulate(mu, x, n_values, n_samples, derive_key(seed, "exceed", i), obs, config=config)
        for k, n in enumerate(n_values):
            v = vals[n]
            disc = abs(v.mean() - ref)
            se = v.std(ddof=1) / math.sqrt(n_samples)
            hits[k] += disc > max(constant * rate ** (n / 2), 3 * se)
    return hits / max(len(starts), 1)
