"""Exact analysis of walks on finite orbits of congruence quotients.

States are integer matrices mod q (cosets ``g Gamma(q)``), generators act by
left multiplication, and transition probabilities are kept as Fractions so
periods, stationary laws and n-step laws come out exactly.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

__all__ = [
    "ModGroupElement",
    "FiniteChain",
    "ChainSpectrum",
    "PeriodicityReport",
    "OrbitTooLarge",
    "ReducibleChain",
    "enumerate_orbit",
    "chain_period",
    "exact_distribution",
    "stationary_distribution",
    "cesaro_distribution",
    "chain_spectrum",
    "periodicity_witness",
]

EXACT_STEPS = 64
SPECTRUM_CHECK_STATES = 12


class OrbitTooLarge(RuntimeError):
    """BFS exceeded ``max_states``."""


class ReducibleChain(ValueError):
    """The chain is not irreducible."""


class ModGroupElement:
    """A d x d integer matrix mod q with determinant 1 mod q."""

    __slots__ = ("entries", "modulus", "_key")

    def __init__(self, entries, modulus: int):
        if modulus < 2:
            raise ValueError("modulus must be >= 2")
        m = np.mod(np.asarray(entries, dtype=np.int64), modulus)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("need a square matrix")
        det = round(np.linalg.det(m)) if m.shape[0] > 3 else _int_det(m)
        if det % modulus != 1 % modulus:
            raise ValueError(f"determinant {det} is not 1 mod {modulus}")
        m.setflags(write=False)
        self.entries = m
        self.modulus = modulus
        self._key = m.tobytes()

    @classmethod
    def identity(cls, d: int, q: int) -> ModGroupElement:
        return cls(np.eye(d, dtype=np.int64), q)

    @property
    def key(self) -> bytes:
        """Canonical byte encoding used for hashing."""
        return self._key

    def __matmul__(self, other: ModGroupElement) -> ModGroupElement:
        if other.modulus != self.modulus:
            raise ValueError("moduli differ")
        return ModGroupElement(self.entries @ other.entries, self.modulus)

    def __eq__(self, other):
        return isinstance(other, ModGroupElement) and self.modulus == other.modulus and self._key == other._key

    def __hash__(self):
        return hash((self.modulus, self._key))

    def __repr__(self):
        return f"ModGroupElement({self.entries.tolist()}, q={self.modulus})"


def _int_det(m) -> int:
    m = [[int(v) for v in row] for row in m]
    if len(m) == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    a = m
    return (a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]))


@dataclass
class FiniteChain:
    """Walk on a finite orbit.

    ``successors[i][g]`` is the state reached from ``i`` by generator ``g`` and
    ``weights[g]`` its probability, so row ``i`` of the transition matrix is
    ``sum_g weights[g] * e_{successors[i][g]}``.
    """

    states: list
    successors: np.ndarray
    weights: tuple

    def __post_init__(self):
        if sum(self.weights) != 1:
            raise ValueError("generator weights must sum to exactly 1")
        self._index = {s.key if hasattr(s, "key") else s: i for i, s in enumerate(self.states)}

    def __len__(self):
        return len(self.states)

    def index(self, state) -> int:
        return self._index[state.key if hasattr(state, "key") else state]

    @property
    def generator_labels(self) -> dict:
        """Map (i, j) -> list of generator indices carrying i to j."""
        labels: dict = {}
        for i, row in enumerate(self.successors):
            for g, j in enumerate(row):
                labels.setdefault((i, int(j)), []).append(g)
        return labels

    def transition(self) -> list:
        """Exact transition matrix as nested lists of Fractions."""
        n = len(self)
        p = [[Fraction(0)] * n for _ in range(n)]
        for i, row in enumerate(self.successors):
            for g, j in enumerate(row):
                p[i][j] += self.weights[g]
        return p

    def transition_float(self) -> np.ndarray:
        n = len(self)
        p = np.zeros((n, n))
        w = np.array([float(x) for x in self.weights])
        for g in range(self.successors.shape[1]):
            np.add.at(p, (np.arange(n), self.successors[:, g]), w[g])
        return p

    def _adjacency(self):
        n = len(self)
        rows = np.repeat(np.arange(n), self.successors.shape[1])
        return csr_matrix((np.ones(rows.size), (rows, self.successors.ravel())), shape=(n, n))

    def is_irreducible(self) -> bool:
        ncomp, _ = connected_components(self._adjacency(), directed=True, connection="strong")
        return ncomp == 1

    def power(self, k: int) -> FiniteChain:
        """Chain driven by the k-fold convolution (one generator per word)."""
        if k < 1:
            raise ValueError("k must be >= 1")
        succ = np.arange(len(self))[:, None]
        weights = [Fraction(1)]
        for _ in range(k):
            succ = self.successors[succ].reshape(len(self), -1)
            weights = [w * v for w in weights for v in self.weights]
        return FiniteChain(list(self.states), succ, tuple(weights))

    def restrict(self, indices) -> FiniteChain:
        """Sub-chain on a set of states closed under every generator."""
        indices = list(indices)
        remap = {old: new for new, old in enumerate(indices)}
        try:
            succ = np.array([[remap[int(j)] for j in self.successors[i]] for i in indices], dtype=np.int64)
        except KeyError:
            raise ValueError("state set is not closed under the generators") from None
        return FiniteChain([self.states[i] for i in indices], succ, self.weights)

    def step(self, dist: list) -> list:
        """One exact step of a Fraction distribution."""
        out = [Fraction(0)] * len(self)
        for i, p in enumerate(dist):
            if p:
                for g, j in enumerate(self.successors[i]):
                    out[j] += p * self.weights[g]
        return out


def enumerate_orbit(generators, start: ModGroupElement, max_states: int = 10**6,
                    weights=None) -> FiniteChain:
    """BFS closure of ``start`` under left multiplication by the generators."""
    gens = list(generators)
    if not gens:
        raise ValueError("need at least one generator")
    q = start.modulus
    if any(g.modulus != q for g in gens):
        raise ValueError("generators and start have different moduli")
    if weights is None:
        weights = [Fraction(1, len(gens))] * len(gens)
    weights = tuple(Fraction(w) for w in weights)
    if any(w <= 0 for w in weights) or sum(weights) != 1:
        raise ValueError("weights must be positive and sum to 1")
    mats = [g.entries for g in gens]
    states = [start]
    index = {start.key: 0}
    succ = []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        row = []
        cur = states[i].entries
        for m in mats:
            nxt = np.mod(m @ cur, q)
            key = nxt.tobytes()
            j = index.get(key)
            if j is None:
                if len(states) >= max_states:
                    raise OrbitTooLarge("orbit not closed within bound")
                j = len(states)
                index[key] = j
                states.append(ModGroupElement(nxt, q))
                queue.append(j)
            row.append(j)
        succ.append(row)
    order = np.empty((len(states), len(mats)), dtype=np.int64)
    for i, row in enumerate(succ):
        order[i] = row
    return FiniteChain(states, order, weights)


def chain_period(chain: FiniteChain):
    """Period and cyclic classes ``D_0, ..., D_{p-1}`` (``D_0`` contains state 0).

    The period is the gcd of ``dist(u) + 1 - dist(v)`` over all edges, with BFS
    distances from state 0.
    """
    if not chain.is_irreducible():
        raise ReducibleChain("period undefined: chain not irreducible")
    n = len(chain)
    dist = [-1] * n
    dist[0] = 0
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in chain.successors[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    period = 0
    for u in range(n):
        for v in chain.successors[u]:
            period = math.gcd(period, dist[u] + 1 - dist[v])
    period = abs(period) or 1
    classes = [[] for _ in range(period)]
    for i, dd in enumerate(dist):
        classes[dd % period].append(i)
    return period, classes


def exact_distribution(chain: FiniteChain, start_index: int, n: int):
    """Law after ``n`` steps from ``start_index``.

    Fractions for ``n <= 64``, floats beyond.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    size = len(chain)
    if n <= EXACT_STEPS:
        dist = [Fraction(0)] * size
        dist[start_index] = Fraction(1)
        for _ in range(n):
            dist = chain.step(dist)
        return dist
    p = chain.transition_float()
    v = np.zeros(size)
    v[start_index] = 1.0
    return v @ np.linalg.matrix_power(p, n)


def distributions(chain: FiniteChain, start_index: int, n_max: int):
    """Exact laws for steps 0..n_max (Fractions)."""
    size = len(chain)
    dist = [Fraction(0)] * size
    dist[start_index] = Fraction(1)
    out = [dist]
    for _ in range(n_max):
        dist = chain.step(dist)
        out.append(dist)
    return out


def stationary_distribution(chain: FiniteChain):
    """Unique stationary law, solved exactly over the rationals."""
    from sympy import Matrix, Rational

    if not chain.is_irreducible():
        raise ReducibleChain("stationary law not unique: chain not irreducible")
    n = len(chain)
    p = chain.transition()
    # (P^T - I) pi = 0 with sum(pi) = 1; replace the last equation by normalization
    rows = [[Rational(p[j][i].numerator, p[j][i].denominator) - (1 if i == j else 0)
             for j in range(n)] for i in range(n - 1)]
    rows.append([Rational(1)] * n)
    rhs = Matrix([0] * (n - 1) + [1])
    sol = Matrix(rows).LUsolve(rhs)
    return [Fraction(int(v.p), int(v.q)) for v in sol]


def cesaro_distribution(chain: FiniteChain, start_index: int, n: int, period: int = 1,
                        residue: int = 0):
    """``(1/n) sum_{k<n}`` of the exact laws at steps ``period * k + residue``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    laws = distributions(chain, start_index, period * (n - 1) + residue)
    acc = [Fraction(0)] * len(chain)
    for k in range(n):
        law = laws[period * k + residue]
        acc = [a + b for a, b in zip(acc, law)]
    return [a / n for a in acc]


@dataclass
class ChainSpectrum:
    eigenvalues: np.ndarray
    second_modulus: float
    exact: list  # eigenvalues confirmed as exact rational roots of the characteristic polynomial


def chain_spectrum(chain: FiniteChain) -> ChainSpectrum:
    """Eigenvalues of the transition matrix and the largest non-Perron modulus.

    For chains with at most 12 states each float eigenvalue is matched with a
    nearby rational (denominator <= 64) and confirmed exactly against the
    rational characteristic polynomial when possible; otherwise the polynomial
    residual must be small.
    """
    p = chain.transition_float()
    ev = np.linalg.eigvals(p).astype(complex)
    if not np.all(np.isfinite(ev)):
        raise np.linalg.LinAlgError("eigenvalue computation failed")
    perron = int(np.argmin(np.abs(ev - 1.0)))
    rest = np.delete(ev, perron)
    second = float(np.max(np.abs(rest))) if rest.size else 0.0
    exact = []
    if len(chain) <= SPECTRUM_CHECK_STATES:
        exact = _confirm_roots(chain, ev)
        for i, val in enumerate(exact):
            if val is not None:
                ev[i] = float(val)
        rest = np.delete(ev, perron)
        second = float(np.max(np.abs(rest))) if rest.size else 0.0
    order = np.lexsort((-ev.imag, -ev.real))
    return ChainSpectrum(ev[order], second, [exact[i] for i in order] if exact else [])


def _confirm_roots(chain: FiniteChain, ev):
    from sympy import Matrix, Rational, Symbol

    t = Symbol("t")
    p = chain.transition()
    mat = Matrix([[Rational(x.numerator, x.denominator) for x in row] for row in p])
    poly = mat.charpoly(t)
    coeffs = [float(c) for c in poly.all_coeffs()]
    scale = sum(abs(c) for c in coeffs)
    out = []
    for lam in ev:
        cand = None
        if abs(lam.imag) < 1e-9:
            r = Fraction(float(lam.real)).limit_denominator(64)
            if poly.as_expr().subs(t, Rational(r.numerator, r.denominator)) == 0:
                cand = r
        if cand is None:
            resid = abs(np.polyval(coeffs, lam))
            if resid > 1e-8 * scale:
                raise np.linalg.LinAlgError(f"eigenvalue {lam} fails the characteristic polynomial check")
        out.append(cand)
    return out


@dataclass
class PeriodicityReport:
    period: int
    classes: list
    holds: bool
    n_checked: int
    first_violation: int | None

    @property
    def witness_sets(self):
        """The cyclic classes when they witness periodicity (period >= 2)."""
        return self.classes if self.period >= 2 and self.holds else None


def periodicity_witness(chain: FiniteChain, n_max: int, start_index: int = 0) -> PeriodicityReport:
    """Check exactly that the n-step law sits on class ``D_{n mod p}`` for all ``n <= n_max``.

    Classes are relabelled so that ``D_0`` contains the start.
    """
    period, classes = chain_period(chain)
    shift = next(i for i, c in enumerate(classes) if start_index in c)
    classes = classes[shift:] + classes[:shift]
    member = {}
    for c, states in enumerate(classes):
        for s in states:
            member[s] = c
    first_bad = None
    for n, law in enumerate(distributions(chain, start_index, n_max)):
        support = [i for i, v in enumerate(law) if v != 0]
        if any(member[i] != n % period for i in support):
            first_bad = n
            break
    return PeriodicityReport(period, classes, first_bad is None, n_max, first_bad)
