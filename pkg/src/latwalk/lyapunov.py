"""Lyapunov (drift) functions built from successive minima.

The basic function is ``V = 1 + eps * lambda_1^{-delta}``; its drift under the
``n0``-step walk is estimated by Monte Carlo, the contraction constants
``alpha, beta`` are fitted as an upper envelope, and the fitted function
drives the recurrence experiments over growing sublevel sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .lattice import LatticePoint, hermite_bound
from .rng import derive_key
from .walk import DEFAULT_CONFIG, StepMeasure, WalkConfig, lambda1_batch, simulate

__all__ = [
    "LyapunovSpec",
    "GrowthProfile",
    "ContractionFit",
    "SweepResult",
    "RecurrenceRow",
    "RecurrenceResult",
    "NoContraction",
    "evaluate_V",
    "V_batch",
    "estimate_drift",
    "drift_holds",
    "fit_contraction",
    "sweep_contraction",
    "lift_multistep",
    "sublevel_sample",
    "probe_points",
    "calibrated_epsilon",
    "recurrence_experiment",
    "escape_profile",
]

UCB_Z = 1.6448536269514722  # one-sided 95%
REJECTION_LIMIT = 10_000
DEFAULT_DELTAS = (0.125, 0.25, 0.5)
DEFAULT_N0 = tuple(range(1, 21))
DEEPEST_LAMBDA1 = 1e-5


class NoContraction(RuntimeError):
    """No contracting (delta, n0) pair was found."""


@dataclass(frozen=True)
class LyapunovSpec:
    """Parameters of ``V = 1 + epsilon * lambda_1^{-delta}`` and its drift constants."""

    epsilon: float = 1.0
    delta: float = 0.5
    n0: int = 1
    alpha: float | None = None
    beta: float | None = None
    multi_minima: bool = False
    dim: int = 2

    def __post_init__(self):
        if self.epsilon < 0 or self.delta <= 0 or self.n0 < 1:
            raise ValueError("need epsilon >= 0, delta > 0, n0 >= 1")
        if self.alpha is not None and not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.beta is not None and self.beta < 0:
            raise ValueError("beta must be >= 0")

    @property
    def B(self) -> float:
        if self.alpha is None or self.beta is None:
            raise ValueError("drift constants not fitted")
        return self.beta / (1.0 - self.alpha)

    @property
    def floor(self) -> float:
        """Smallest value V can take (at the densest lattice packing bound)."""
        return 1.0 + self.epsilon * hermite_bound(self.dim) ** (-self.delta)

    def with_constants(self, alpha: float, beta: float) -> LyapunovSpec:
        return replace(self, alpha=alpha, beta=beta)


@dataclass(frozen=True)
class GrowthProfile:
    """A growth function phi: N -> [1, inf) of constant, polynomial or exponential type."""

    kind: str = "constant"
    param: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "polynomial", "exponential"):
            raise ValueError(f"unknown growth kind {self.kind!r}")
        if self.kind == "constant" and self.param < 1:
            raise ValueError("constant growth must be >= 1")
        if self.kind != "constant" and self.param < 0:
            raise ValueError("growth parameter must be >= 0")

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        if self.kind == "constant":
            out = np.full_like(n, self.param)
        elif self.kind == "polynomial":
            out = np.maximum(n, 1.0) ** self.param
        else:
            out = np.exp(self.param * n)
        out = np.maximum(out, 1.0)
        return float(out) if out.ndim == 0 else out

    @property
    def exponent(self) -> float:
        """limsup (1/n) log phi(n)."""
        return self.param if self.kind == "exponential" else 0.0


def V_batch(spec: LyapunovSpec, reduced: np.ndarray) -> np.ndarray:
    """V on a stack of reduced bases."""
    lam1 = lambda1_batch(reduced)
    if not spec.multi_minima:
        return 1.0 + spec.epsilon * lam1 ** (-spec.delta)
    if reduced.shape[1] == 2:
        return 1.0 + spec.epsilon * lam1 ** (-spec.delta)
    vals = []
    for b in reduced:
        lam = LatticePoint(b).minima
        prods = np.cumprod(lam)[:-1]
        vals.append(1.0 + spec.epsilon * np.sum(prods ** (-spec.delta)))
    return np.array(vals)


def evaluate_V(spec: LyapunovSpec, x: LatticePoint) -> float:
    """``1 + eps * lambda_1(x)^{-delta}``, or the successive-minima variant
    ``1 + eps * sum_{i<d} (lambda_1 ... lambda_i)^{-delta}`` when ``spec.multi_minima``.
    """
    if spec.multi_minima:
        prods = np.cumprod(x.minima)[:-1]
        return float(1.0 + spec.epsilon * np.sum(prods ** (-spec.delta)))
    return float(1.0 + spec.epsilon * x.lambda1 ** (-spec.delta))


def estimate_drift(mu: StepMeasure, spec: LyapunovSpec, x: LatticePoint, n_samples: int,
                   seed: int, config: WalkConfig = DEFAULT_CONFIG):
    """Monte-Carlo estimate of ``pi(mu^{*n0}) V (x)``; returns ``(mean, std_error)``."""
    key = derive_key(seed, "drift")
    vals = simulate(mu, x, [spec.n0], n_samples, key, lambda b: V_batch(spec, b),
                    config=config)[spec.n0]
    se = float(np.std(vals, ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    return float(np.mean(vals)), se


@dataclass
class ContractionFit:
    alpha: float
    beta: float
    spec: LyapunovSpec
    values: np.ndarray
    drifts: np.ndarray
    std_errors: np.ndarray
    residuals: np.ndarray
    tail_ratio: float = float("nan")

    @property
    def contracting(self) -> bool:
        return self.alpha < 1.0 and self.tail_ratio < 1.0

    def meets(self, target: float) -> bool:
        return self.alpha <= target and self.tail_ratio <= target

    @property
    def status(self) -> str:
        return "contraction" if self.contracting else "no contraction detected"

    def fitted_spec(self) -> LyapunovSpec:
        if not self.contracting:
            raise NoContraction("no contraction detected")
        return self.spec.with_constants(max(self.alpha, 1e-12), self.beta)


def fit_contraction(mu: StepMeasure, spec: LyapunovSpec, probes, n_samples: int, seed: int,
                    config: WalkConfig = DEFAULT_CONFIG) -> ContractionFit:
    """Tightest linear envelope ``drift <= alpha V + beta`` at 95% upper bounds.

    ``beta`` is the largest drift bound among probes with ``V <= 2 min V``;
    ``alpha`` is the largest ``(drift - beta) / V`` over the remaining probes.
    An ``alpha >= 1`` means no contraction was detected.

    Also reports ``tail_ratio``, the largest ``(drift - 1) / (V - 1)`` over the
    top quartile of probes.  It does not depend on epsilon and tracks the
    contraction of ``lambda_1^{-delta}`` deep in the cusp, where a flat V
    (small delta) lets a large beta hide expansion.
    """
    probes = list(probes)
    if not probes:
        raise ValueError("need probe points")
    values = np.array([evaluate_V(spec, x) for x in probes])
    est = [estimate_drift(mu, spec, x, n_samples, derive_key(seed, "probe", i), config)
           for i, x in enumerate(probes)]
    drifts = np.array([e[0] for e in est])
    ses = np.array([e[1] for e in est])
    ucb = drifts + UCB_Z * ses
    low = values <= 2.0 * values.min()
    beta = float(ucb[low].max())
    if np.any(~low):
        alpha = float(np.max((ucb[~low] - beta) / values[~low]))
    else:
        alpha = float("inf")
    alpha = max(alpha, 0.0)
    residuals = ucb - (alpha * values + beta)
    top = values >= np.quantile(values, 0.75)
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = float(np.max((ucb[top] - 1.0) / (values[top] - 1.0))) if spec.epsilon > 0 else math.inf
    return ContractionFit(alpha, beta, spec, values, drifts, ses, residuals, tail)


def drift_holds(mu: StepMeasure, spec: LyapunovSpec, probes, n_samples: int, seed: int,
                config: WalkConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Per probe: does ``drift <= alpha V + beta + 3 se`` hold for the fitted constants?"""
    if spec.alpha is None or spec.beta is None:
        raise ValueError("drift constants not fitted")
    out = []
    for i, x in enumerate(probes):
        m, se = estimate_drift(mu, spec, x, n_samples, derive_key(seed, "check", i), config)
        out.append(m <= spec.alpha * evaluate_V(spec, x) + spec.beta + 3.0 * se)
    return np.array(out, dtype=bool)


@dataclass
class SweepResult:
    fit: ContractionFit | None
    tried: list = field(default_factory=list)  # (delta, n0, alpha, tail_ratio)

    @property
    def found(self) -> bool:
        return self.fit is not None


def sweep_contraction(mu: StepMeasure, probes_for, n_samples: int, seed: int, epsilon=None,
                      deltas=DEFAULT_DELTAS, n0s=DEFAULT_N0, target: float = 0.99,
                      config: WalkConfig = DEFAULT_CONFIG) -> SweepResult:
    """Scan delta (outer) and n0 (inner); return the first fit whose alpha and
    tail ratio are both <= target.

    ``probes_for(spec)`` supplies probe points for a given V.  ``epsilon`` is a
    number or a function of delta (default :func:`calibrated_epsilon`).
    """
    if epsilon is None:
        epsilon = calibrated_epsilon
    tried = []
    for delta in deltas:
        probes = None
        eps = epsilon(delta) if callable(epsilon) else epsilon
        for n0 in n0s:
            spec = LyapunovSpec(epsilon=eps, delta=delta, n0=n0, dim=mu.dim)
            if probes is None:
                probes = probes_for(spec)
            fit = fit_contraction(mu, spec, probes, n_samples, derive_key(seed, delta, n0), config)
            tried.append((delta, n0, fit.alpha, fit.tail_ratio))
            if fit.meets(target):
                return SweepResult(fit, tried)
    return SweepResult(None, tried)


def lift_multistep(spec: LyapunovSpec, mu: StepMeasure, n_samples: int, seed: int,
                   config: WalkConfig = DEFAULT_CONFIG):
    """One-step Lyapunov function from one for the ``n0``-step walk.

    Returns ``x -> sum_k alpha^{(n0-1-k)/n0} (pi(mu)^k V')(x)`` with each
    ``pi(mu)^k V'`` estimated from ``n_samples`` trajectories.
    """
    if spec.alpha is None:
        raise ValueError("lifting needs a fitted alpha")
    n0, alpha = spec.n0, spec.alpha
    coef = [alpha ** ((n0 - 1 - k) / n0) for k in range(n0)]

    def V(x: LatticePoint) -> float:
        if n0 == 1:
            return evaluate_V(spec, x)
        vals = simulate(mu, x, range(n0), n_samples, derive_key(seed, "lift"),
                        lambda b: V_batch(spec, b), config=config)
        return float(sum(c * np.mean(vals[k]) for k, c in enumerate(coef)))

    V.coefficients = coef
    return V


# ---------------------------------------------------------------------------
# sublevel sets


def _random_rotation(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def _seed_lattice(spec: LyapunovSpec, target: float, d: int) -> np.ndarray:
    """A basis with V exactly ``target`` (for the lambda_1 form of V)."""
    if spec.epsilon == 0:
        if abs(target - 1.0) > 1e-12:
            raise ValueError("with epsilon = 0 the only level is V = 1")
        return np.eye(d)
    t = ((target - 1.0) / spec.epsilon) ** (1.0 / spec.delta)  # 1 / lambda_1
    if t >= 1.0:
        diag = np.ones(d)
        diag[0], diag[-1] = t, 1.0 / t
        return np.diag(diag)
    if d != 2:
        raise ValueError("target below V(Z^d) is only supported for d = 2")
    # lattices on the unit arc of the modular fundamental domain: lambda_1 = sin(theta)^{-1/2}
    s = t * t
    if s < math.sqrt(3) / 2 - 1e-15:
        raise ValueError(f"target {target!r} is below the attainable floor {spec.floor!r}")
    s = min(max(s, math.sqrt(3) / 2), 1.0)
    x = math.sqrt(max(1.0 - s * s, 0.0))
    return np.array([[1.0, x], [0.0, s]]) / math.sqrt(s)


def sublevel_sample(spec: LyapunovSpec, target_V: float, count: int, seed: int, d: int = 2,
                    burn_in: int = 5, step_scale: float = 0.1):
    """``count`` lattices with ``V`` in ``[target_V / 2, target_V]``.

    Each starts from a lattice with ``V = target_V`` exactly (``diag(t, 1, ..., 1/t) Z^d``,
    randomly rotated) and is randomized by ``burn_in`` small random moves that are
    rejected whenever they leave the bracket.
    """
    if count == 0:
        return []
    if target_V < spec.floor - 1e-12:
        raise ValueError(f"target {target_V!r} is below the attainable floor {spec.floor!r}")
    base = _seed_lattice(spec, target_V, d)
    lo, hi = target_V / 2.0, target_V * (1 + 1e-12)
    out = []
    for i in range(count):
        rng = np.random.default_rng(derive_key(seed, "sublevel", target_V, i))
        b = _random_rotation(rng, d) @ base
        accepted = attempts = 0
        while accepted < burn_in:
            attempts += 1
            if attempts > REJECTION_LIMIT:
                raise RuntimeError("sublevel_sample: rejection failed after 10^4 attempts")
            a = rng.standard_normal((d, d)) * step_scale
            a -= np.trace(a) / d * np.eye(d)
            g = np.linalg.matrix_power(np.eye(d) + a / 16, 16)
            g /= abs(np.linalg.det(g)) ** (1.0 / d)
            cand = LatticePoint(g @ b)
            v = evaluate_V(spec, cand)
            if lo <= v <= hi:
                b = cand.reduced_basis
                accepted += 1
        out.append(LatticePoint(b))
    return out


def calibrated_epsilon(delta: float, v_max: float = 1e3, deepest: float = DEEPEST_LAMBDA1) -> float:
    """Weight putting the level ``V = v_max`` at ``lambda_1 = deepest``.

    Keeps probes of every delta inside the range where reduced bases are
    well conditioned (lambda_2 / lambda_1 <= 1e10 for the default depth).
    """
    return (v_max - 1.0) * deepest**delta


def probe_points(spec: LyapunovSpec, count: int, v_max: float, seed: int, d: int = 2,
                 v_min: float | None = None):
    """Probe lattices whose V-levels are log-spaced from near the floor up to ``v_max``."""
    v_min = v_min if v_min is not None else max(spec.floor * 1.02, 1.0 + spec.epsilon)
    levels = np.geomspace(v_min, v_max, count)
    pts = []
    for i, lev in enumerate(levels):
        pts.extend(sublevel_sample(spec, float(lev), 1, derive_key(seed, "probe", i), d=d))
    return pts


# ---------------------------------------------------------------------------
# recurrence


@dataclass
class RecurrenceRow:
    n: int
    point: int
    start_V: float
    escape: float
    escape_se: float
    cesaro_escape: float
    cesaro_se: float
    bound: float


@dataclass
class RecurrenceResult:
    spec: LyapunovSpec
    tol: float
    threshold: float
    n0_pointwise: int | None
    n0_cesaro: int | None
    rows: list

    def sup_by_n(self):
        """Per n: (sup escape, its se, sup Cesaro escape, its se, bound)."""
        out = {}
        for r in self.rows:
            cur = out.get(r.n)
            if cur is None:
                out[r.n] = [r.escape, r.escape_se, r.cesaro_escape, r.cesaro_se, r.bound]
                continue
            if r.escape > cur[0]:
                cur[0], cur[1] = r.escape, r.escape_se
            if r.cesaro_escape > cur[2]:
                cur[2], cur[3] = r.cesaro_escape, r.cesaro_se
        return out


def _threshold_n0(pred, horizon: int = 10**6) -> int | None:
    """Smallest n such that pred(m) holds for every m in [n, horizon]."""
    ms = np.arange(1, horizon + 1)
    ok = pred(ms)
    if not ok[-1]:
        return None
    bad = np.flatnonzero(~ok)
    return int(ms[bad[-1]] + 1) if bad.size else 1


def recurrence_experiment(mu: StepMeasure, spec: LyapunovSpec, phi: GrowthProfile, tol: float,
                          n_values, n_samples: int, seed: int, points_per_level: int = 5,
                          d: int = 2, config: WalkConfig = DEFAULT_CONFIG) -> RecurrenceResult:
    """Escape mass from the recurrence set ``M = {V <= 2B/tol}`` for starts in ``K_n``.

    Steps count applications of ``mu^{*n0}`` (the walk for which ``spec`` carries the
    drift constants).  For every ``n`` in ``n_values`` starting points are drawn from
    ``K_n = {V <= phi(n)}`` at levels log-spaced up to ``phi(n)``; each row reports the
    escape mass after ``n`` steps, the Cesaro escape mass over steps ``0..n-1``, and the
    bound ``(tol / 2B) alpha^n phi(n) + tol / 2``.
    """
    alpha, B = spec.alpha, spec.B
    threshold = 2.0 * B / tol
    n0 = spec.n0

    def pointwise_ok(m):
        return alpha ** m * phi(m) <= B

    def cesaro_ok(m):
        k = np.floor(tol * m / 4.0)
        return (alpha ** k * phi(m) <= B / 2.0) & (k / m + 0.75 * tol <= tol)

    n_i = _threshold_n0(pointwise_ok) if phi.exponent < -math.log(alpha) else None
    n_ii = _threshold_n0(cesaro_ok) if phi.exponent == 0 else None

    rows = []
    for n in n_values:
        n = int(n)
        top = float(phi(n))
        if top < spec.floor:
            continue  # K_n is empty
        levels = np.geomspace(min(spec.floor * 1.02, top), top, points_per_level)
        for j, lev in enumerate(levels):
            x = sublevel_sample(spec, float(lev), 1, derive_key(seed, "K", n, j), d=d)[0]
            rec = [k * n0 for k in range(n + 1)]
            vals = simulate(mu, x, rec, n_samples, derive_key(seed, "rec", n, j),
                            lambda b: (V_batch(spec, b) > threshold).astype(float), config=config)
            final = vals[n * n0]
            ces = np.mean([vals[k * n0] for k in range(n)], axis=0)
            rows.append(RecurrenceRow(
                n=n, point=j, start_V=evaluate_V(spec, x),
                escape=float(final.mean()), escape_se=float(final.std(ddof=1) / math.sqrt(n_samples)),
                cesaro_escape=float(ces.mean()), cesaro_se=float(ces.std(ddof=1) / math.sqrt(n_samples)),
                bound=float(tol / (2 * B) * alpha**n * top + tol / 2),
            ))
    return RecurrenceResult(spec, tol, threshold, n_i, n_ii, rows)


def escape_profile(mu: StepMeasure, spec: LyapunovSpec, starts, levels, n_values, n_samples: int,
                   seed: int, config: WalkConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Mass outside ``{V <= C}`` for each level C, maximized over starts and steps.

    Returns an array indexed by level; tightness means it decreases to 0 as C grows.
    """
    levels = np.asarray(levels, dtype=float)
    worst = np.zeros(len(levels))
    rec = sorted(set(int(n) for n in n_values))
    for i, x in enumerate(starts):
        vals = simulate(mu, x, rec, n_samples, derive_key(seed, "tight", i),
                        lambda b: V_batch(spec, b), config=config)
        for n in rec:
            mass = (vals[n][:, None] > levels[None, :]).mean(axis=0)
            worst = np.maximum(worst, mass)
    return worst
