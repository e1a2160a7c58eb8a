"""Monte-Carlo random walks on spaces of lattices.

A walk is driven by a finitely supported :class:`StepMeasure`.  Trajectories
are simulated in vectorized batches: the state of trajectory ``i`` is a
reduced basis (or, for integral walks on a congruence quotient, the basis
matrix mod ``q``) and step ``k`` of trajectory ``i`` draws its atom from the
counter-based stream ``(key, i, k)``.  Results therefore do not depend on the
chunk layout or on the number of worker threads.

Observables are batch functions: they take an array of shape ``(N, d, d)``
holding reduced bases (columns are basis vectors) -- or integer residues when
the walk runs mod ``q`` -- and return ``N`` values.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product as iproduct

import numpy as np

from .lattice import GroupElement, LatticePoint, SingularBasisError, lll_reduce, reduce_basis
from .rng import derive_key, uniforms

__all__ = [
    "StepMeasure",
    "Estimate",
    "ObservableSeries",
    "RateFit",
    "DiscrepancySeries",
    "WalkConfig",
    "reduce_batch",
    "lambda1_batch",
    "pointwise",
    "constant",
    "residue_indicator",
    "simulate",
    "sample_trajectory",
    "estimate_pushforward",
    "pushforward_series",
    "cesaro_estimate",
    "arithmetic_cesaro_estimate",
    "discrepancy_series",
    "fit_decay_rate",
]

RENORM_EVERY = 32
MAX_CONVOLUTION_ATOMS = 10**6
MAX_CONVOLUTION_POWER = 8


class StepMeasure:
    """A probability measure on SL_d(R) with finitely many atoms."""

    def __init__(self, atoms, weights=None):
        atoms = [a if isinstance(a, GroupElement) else GroupElement(a) for a in atoms]
        if not atoms:
            raise ValueError("a step measure needs at least one atom")
        dims = {a.dim for a in atoms}
        if len(dims) != 1:
            raise ValueError("atoms have different dimensions")
        if weights is None:
            weights = np.full(len(atoms), 1.0 / len(atoms))
        w = np.asarray(weights, dtype=float)
        if w.shape != (len(atoms),):
            raise ValueError("need one weight per atom")
        if np.any(w <= 0):
            raise ValueError("weights must be strictly positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        for i in range(len(atoms)):
            for j in range(i):
                if atoms[i].allclose(atoms[j]):
                    raise ValueError(f"atoms {j} and {i} coincide")
        self.atoms = tuple(atoms)
        self.weights = w
        self.dim = dims.pop()
        self.matrices = np.stack([a.entries for a in atoms])
        self._cumulative = np.cumsum(w)
        self._cumulative[-1] = 1.0

    @classmethod
    def dirac(cls, g) -> StepMeasure:
        return cls([g])

    def __len__(self):
        return len(self.atoms)

    @property
    def is_integral(self) -> bool:
        return all(a.is_integral for a in self.atoms)

    def residues(self, q: int) -> np.ndarray:
        return np.stack([a.mod(q) for a in self.atoms])

    def choose(self, key: int, streams: np.ndarray, counter: int) -> np.ndarray:
        """Atom indices for the given trajectory streams at one step."""
        u = uniforms(key, streams, counter)
        return np.searchsorted(self._cumulative, u, side="right").clip(max=len(self.atoms) - 1)

    def conjugate(self, a: GroupElement) -> StepMeasure:
        """The measure pushed forward by ``g -> a g a^-1``."""
        return StepMeasure([g.conjugate(a) for g in self.atoms], self.weights)

    def with_identity(self, weight: float) -> StepMeasure:
        """Mix in an identity atom with the given weight."""
        w = np.append(self.weights * (1.0 - weight), weight)
        return StepMeasure(list(self.atoms) + [GroupElement.identity(self.dim)], w / w.sum())

    def power(self, n: int) -> StepMeasure:
        """Materialize the convolution power: law of ``g_n ... g_1``."""
        if n < 1:
            raise ValueError("power must be >= 1")
        if n > MAX_CONVOLUTION_POWER or len(self.atoms) ** n > MAX_CONVOLUTION_ATOMS:
            raise ValueError("convolution power too large to materialize")
        merged: dict[bytes, list] = {}
        for word in iproduct(range(len(self.atoms)), repeat=n):
            m = np.eye(self.dim)
            p = 1.0
            for i in word:  # word[0] is applied first
                m = self.matrices[i] @ m
                p *= self.weights[i]
            key = np.round(m, 10).tobytes()
            if key in merged:
                merged[key][1] += p
            else:
                merged[key] = [m, p]
        mats = [v[0] for v in merged.values()]
        ws = np.array([v[1] for v in merged.values()])
        return StepMeasure(mats, ws / ws.sum())

    def __repr__(self):
        return f"StepMeasure({len(self.atoms)} atoms, d={self.dim})"


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n_samples: int

    def __iter__(self):
        yield self.mean
        yield self.std_error


@dataclass
class ObservableSeries:
    """Monte-Carlo estimates of an observable along a list of step counts."""

    n_values: np.ndarray
    estimates: np.ndarray
    std_errors: np.ndarray
    sample_count: int
    cesaro_mean: float | None = None
    cesaro_std_error: float | None = None
    meta: dict = field(default_factory=dict)


@dataclass
class RateFit:
    slope: float
    intercept: float
    n_points: int
    noise_dominated: bool

    @property
    def rate(self) -> float:
        """Per-step contraction factor exp(slope)."""
        return math.exp(self.slope)


@dataclass
class DiscrepancySeries(ObservableSeries):
    reference: float = 0.0
    fit: RateFit | None = None


@dataclass(frozen=True)
class WalkConfig:
    """Execution layout; part of the reproducibility record."""

    chunk_size: int = 1 << 15
    threads: int = 1

    def as_dict(self):
        return {"chunk_size": self.chunk_size, "threads": self.threads}


DEFAULT_CONFIG = WalkConfig()


# ---------------------------------------------------------------------------
# batch lattice operations


def _gauss_batch(b: np.ndarray) -> np.ndarray:
    b1 = b[:, :, 0].copy()
    b2 = b[:, :, 1].copy()
    n1 = np.einsum("ij,ij->i", b1, b1)
    n2 = np.einsum("ij,ij->i", b2, b2)
    sw = n2 < n1
    b1[sw], b2[sw] = b2[sw], b1[sw].copy()
    n1[sw], n2[sw] = n2[sw], n1[sw].copy()
    idx = np.arange(len(b))
    for _ in range(1_000):
        if idx.size == 0:
            break
        c1, c2 = b1[idx], b2[idx]
        m = np.rint(np.einsum("ij,ij->i", c1, c2) / n1[idx])
        c2 = c2 - m[:, None] * c1
        m2 = np.einsum("ij,ij->i", c2, c2)
        sw = m2 < n1[idx]
        done = (m == 0) & ~sw
        new1 = np.where(sw[:, None], c2, c1)
        new2 = np.where(sw[:, None], c1, c2)
        nn1 = np.where(sw, m2, n1[idx])
        nn2 = np.where(sw, n1[idx], m2)
        b1[idx], b2[idx], n1[idx], n2[idx] = new1, new2, nn1, nn2
        idx = idx[~done]
    else:
        raise SingularBasisError("batched Gauss reduction did not terminate")
    out = np.stack([b1, b2], axis=2)
    return _normalize_signs_batch(out)


def _normalize_signs_batch(b: np.ndarray) -> np.ndarray:
    first = b[:, 0, :]
    scale = np.max(np.abs(b), axis=1)
    lead = np.where(np.abs(first) > 1e-12 * scale, first, b[:, 1, :])
    flip = np.where(lead < 0, -1.0, 1.0)
    return b * flip[:, None, :]


def reduce_batch(bases: np.ndarray) -> np.ndarray:
    """Reduce a stack of bases; vectorized Gauss reduction for d = 2."""
    bases = np.asarray(bases, dtype=float)
    if bases.shape[1] == 2:
        return _gauss_batch(bases)
    return np.stack([lll_reduce(b)[0] for b in bases])


def lambda1_batch(reduced: np.ndarray) -> np.ndarray:
    """lambda_1 for a stack of reduced bases."""
    if reduced.shape[1] == 2:
        return np.sqrt(np.einsum("ij,ij->i", reduced[:, :, 0], reduced[:, :, 0]))
    return np.array([LatticePoint(b).lambda1 for b in reduced])


def _renormalize_batch(b: np.ndarray) -> np.ndarray:
    det = np.abs(np.linalg.det(b))
    return b / (det ** (1.0 / b.shape[1]))[:, None, None]


def pointwise(fn):
    """Lift a function of a LatticePoint to a batch observable."""

    def batch(bases):
        return np.array([fn(LatticePoint(b)) for b in bases], dtype=float)

    batch.__name__ = getattr(fn, "__name__", "pointwise")
    return batch


def constant(c: float):
    def batch(states):
        return np.full(len(states), float(c))

    return batch


def residue_indicator(targets, q: int):
    """Indicator of a set of residue matrices (for walks run mod q)."""
    keys = {np.mod(np.asarray(t, dtype=np.int64), q).tobytes() for t in targets}
    flat = np.array([np.frombuffer(k, dtype=np.int64) for k in keys])

    def batch(residues):
        r = residues.reshape(len(residues), -1)
        hit = np.zeros(len(r), dtype=bool)
        for t in flat:
            hit |= np.all(r == t, axis=1)
        return hit.astype(float)

    return batch


# ---------------------------------------------------------------------------
# simulation


def _initial_state(x0, n: int, modulus):
    if modulus is not None:
        b = x0.basis if isinstance(x0, LatticePoint) else np.asarray(x0)
        rb = np.round(b)
        if np.any(np.abs(b - rb) > 1e-9):
            raise ValueError("walks mod q need an integral starting basis")
        r = np.mod(rb.astype(np.int64), modulus)
        return np.broadcast_to(r, (n,) + r.shape).copy()
    red = x0.reduced_basis if isinstance(x0, LatticePoint) else reduce_basis(x0)[0]
    return np.broadcast_to(red, (n,) + red.shape).copy()


def _simulate_chunk(mu, x0, record, streams, key, observe, modulus):
    n_max = record[-1] if record else 0
    state = _initial_state(x0, len(streams), modulus)
    mats = mu.residues(modulus) if modulus is not None else mu.matrices
    out = {}
    want = set(record)
    if 0 in want:
        out[0] = observe(state)
    for step in range(1, n_max + 1):
        idx = mu.choose(key, streams, step)
        if modulus is not None:
            state = np.mod(np.matmul(mats[idx], state), modulus)
        else:
            state = reduce_batch(np.matmul(mats[idx], state))
            if step % RENORM_EVERY == 0:
                state = _renormalize_batch(state)
        if step in want:
            out[step] = observe(state)
    return out


def simulate(mu: StepMeasure, x0, record, n_samples: int, key: int, observe,
             modulus: int | None = None, config: WalkConfig = DEFAULT_CONFIG):
    """Run ``n_samples`` trajectories and evaluate ``observe`` at each step in ``record``.

    Returns a dict mapping each recorded step to an array of ``n_samples`` values.
    """
    record = sorted(set(int(r) for r in record))
    if record and record[0] < 0:
        raise ValueError("step counts must be >= 0")
    if n_samples < 1:
        raise ValueError("need at least one sample")
    if mu.dim != (x0.dim if isinstance(x0, LatticePoint) else np.asarray(x0).shape[0]):
        raise ValueError("dimension mismatch between measure and starting point")
    if modulus is not None and not mu.is_integral:
        raise ValueError("walks mod q need integral atoms")
    chunks = [np.arange(s, min(s + config.chunk_size, n_samples), dtype=np.uint64)
              for s in range(0, n_samples, config.chunk_size)]

    def work(streams):
        return _simulate_chunk(mu, x0, record, streams, key, observe, modulus)

    if config.threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(config.threads) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    return {n: np.concatenate([np.asarray(p[n], dtype=float) for p in parts]) for n in record}


def _estimate(values: np.ndarray) -> Estimate:
    n = len(values)
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return Estimate(mean, se, n)


def sample_trajectory(mu: StepMeasure, n: int, x0: LatticePoint, seed: int) -> LatticePoint:
    """One sample of ``g_n ... g_1 x0`` (trajectory 0 of the seed's stream family)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    key = derive_key(seed, "trajectory")
    res = {}

    def grab(states):
        res["b"] = states[0].copy()
        return np.zeros(len(states))

    simulate(mu, x0, [n], 1, key, grab)
    return LatticePoint(res["b"])


def estimate_pushforward(mu, n, x0, f, n_samples, seed, modulus=None,
                         config: WalkConfig = DEFAULT_CONFIG) -> Estimate:
    """Monte-Carlo estimate of the integral of f against ``mu^{*n} * delta_x0``."""
    key = derive_key(seed, "pushforward")
    vals = simulate(mu, x0, [n], n_samples, key, f, modulus, config)[n]
    return _estimate(vals)


def pushforward_series(mu, n_values, x0, f, n_samples, seed, modulus=None,
                       config: WalkConfig = DEFAULT_CONFIG) -> ObservableSeries:
    """:func:`estimate_pushforward` at several step counts, sharing trajectories.

    Because draws are keyed by (trajectory, step), the value at each ``n``
    equals a separate :func:`estimate_pushforward` call with the same seed.
    """
    key = derive_key(seed, "pushforward")
    n_values = np.array(sorted(set(int(n) for n in n_values)))
    vals = simulate(mu, x0, n_values, n_samples, key, f, modulus, config)
    ests = [_estimate(vals[n]) for n in n_values]
    return ObservableSeries(
        n_values=n_values,
        estimates=np.array([e.mean for e in ests]),
        std_errors=np.array([e.std_error for e in ests]),
        sample_count=n_samples,
        meta={"layout": config.as_dict()},
    )


def _cesaro(mu, steps, x0, f, n_samples, seed, modulus, config, label) -> ObservableSeries:
    means, ses = [], []
    for k, n in enumerate(steps):
        key = derive_key(seed, label, k)
        e = _estimate(simulate(mu, x0, [n], n_samples, key, f, modulus, config)[n])
        means.append(e.mean)
        ses.append(e.std_error)
    means = np.array(means)
    ses = np.array(ses)
    m = len(steps)
    return ObservableSeries(
        n_values=np.array(steps),
        estimates=means,
        std_errors=ses,
        sample_count=n_samples,
        cesaro_mean=float(math.fsum(means) / m),
        cesaro_std_error=float(math.sqrt(math.fsum(ses**2)) / m),
        meta={"layout": config.as_dict()},
    )


def cesaro_estimate(mu, n, x0, f, n_samples, seed, modulus=None,
                    config: WalkConfig = DEFAULT_CONFIG) -> ObservableSeries:
    """Estimates at k = 0..n-1 (fresh trajectories per k) and their running mean."""
    return arithmetic_cesaro_estimate(mu, 1, 0, n, x0, f, n_samples, seed, modulus, config)


def arithmetic_cesaro_estimate(mu, period, residue, n, x0, f, n_samples, seed, modulus=None,
                               config: WalkConfig = DEFAULT_CONFIG) -> ObservableSeries:
    """Cesaro mean of the estimates at steps ``period * k + residue``, k < n."""
    if period < 1 or not 0 <= residue < period:
        raise ValueError("need period >= 1 and 0 <= residue < period")
    if n < 1:
        raise ValueError("n must be >= 1")
    steps = [period * k + residue for k in range(n)]
    return _cesaro(mu, steps, x0, f, n_samples, seed, modulus, config, "cesaro")


def fit_decay_rate(d_values, std_errors, min_points: int = 5) -> RateFit:
    """Least-squares slope of log|D_n| over the leading run with |D_n| > 3 se."""
    d = np.abs(np.asarray(d_values, dtype=float))
    se = np.asarray(std_errors, dtype=float)
    above = (d > 3 * se) & (d > 0)
    run = len(d) if above.all() else int(np.argmin(above))
    ns = np.arange(run)
    if run < 2:
        return RateFit(float("nan"), float("nan"), run, True)
    slope, intercept = np.polyfit(ns, np.log(d[:run]), 1)
    return RateFit(float(slope), float(intercept), run, run < min_points)


def discrepancy_series(mu, x0, f, haar_expectation, n_max, n_samples, seed, modulus=None,
                       config: WalkConfig = DEFAULT_CONFIG) -> DiscrepancySeries:
    """Estimated discrepancy D_n(f)(x0) for n = 0..n_max with a decay-rate fit."""
    if not math.isfinite(haar_expectation):
        raise ValueError("reference expectation must be finite")
    s = pushforward_series(mu, range(n_max + 1), x0, f, n_samples, seed, modulus, config)
    dvals = s.estimates - haar_expectation
    return DiscrepancySeries(
        n_values=s.n_values,
        estimates=dvals,
        std_errors=s.std_errors,
        sample_count=n_samples,
        meta=s.meta,
        reference=float(haar_expectation),
        fit=fit_decay_rate(dvals, s.std_errors),
    )
