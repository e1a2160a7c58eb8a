"""Unimodular lattices in R^d and the action of SL_d(R) on them.

Lattices are stored by a basis matrix whose *columns* generate the lattice,
so a group element ``g`` acts by left multiplication ``g @ basis``.
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np

__all__ = [
    "DET_TOL",
    "MAX_DIM",
    "ENUM_BUDGET",
    "EnumerationBudgetExceeded",
    "SingularBasisError",
    "GroupElement",
    "LatticePoint",
    "apply_group",
    "reduce_basis",
    "lll_reduce",
    "gauss_reduce",
    "shortest_vector_length",
    "successive_minima",
    "height",
    "enumerate_short_vectors",
    "hermite_bound",
    "minkowski_constant",
]

DET_TOL = 1e-9
RENORM_TOL = 1e-12
MAX_DIM = 10
ENUM_BUDGET = 10**7
COND_LIMIT = 1e12
LLL_DELTA = 0.99


class EnumerationBudgetExceeded(RuntimeError):
    """Raised when short-vector enumeration visits too many nodes."""


class SingularBasisError(ValueError):
    """Raised for a numerically singular lattice basis."""


def _renormalize(m: np.ndarray, what: str) -> np.ndarray:
    det = np.linalg.det(m)
    if not det > 0:
        raise ValueError(f"{what} must have positive determinant, got {det!r}")
    if abs(det - 1.0) > 1e-6:
        raise ValueError(f"{what} is not unimodular (det = {det!r})")
    if abs(det - 1.0) > RENORM_TOL:
        m = m / det ** (1.0 / m.shape[0])
    return m


class GroupElement:
    """A d x d real matrix of determinant one."""

    __slots__ = ("entries", "dim", "_integral")

    def __init__(self, entries):
        m = np.array(entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
            raise ValueError("group element must be a square matrix of size >= 2")
        m = _renormalize(m, "group element")
        m.setflags(write=False)
        self.entries = m
        self.dim = m.shape[0]
        self._integral = bool(np.all(m == np.round(m)))

    @classmethod
    def identity(cls, d: int) -> GroupElement:
        return cls(np.eye(d))

    @classmethod
    def diag(cls, *values) -> GroupElement:
        return cls(np.diag(values))

    @property
    def is_integral(self) -> bool:
        return self._integral

    def __matmul__(self, other: GroupElement) -> GroupElement:
        if not isinstance(other, GroupElement):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return GroupElement(self.entries @ other.entries)

    def __pow__(self, k: int) -> GroupElement:
        if k < 0:
            return self.inverse() ** (-k)
        return GroupElement(np.linalg.matrix_power(self.entries, k))

    def inverse(self) -> GroupElement:
        inv = np.linalg.inv(self.entries)
        if self._integral:
            inv = np.round(inv)
        return GroupElement(inv)

    def conjugate(self, a: GroupElement) -> GroupElement:
        """Return ``a g a^-1``."""
        return a @ self @ a.inverse()

    def op_norm(self) -> float:
        return float(np.linalg.norm(self.entries, 2))

    def mod(self, q: int) -> np.ndarray:
        """Entries reduced mod ``q``; only defined for integral elements."""
        if not self._integral:
            raise ValueError("reduction mod q needs an integral matrix")
        return np.mod(np.round(self.entries).astype(np.int64), q)

    def allclose(self, other: GroupElement, tol: float = 1e-12) -> bool:
        return self.dim == other.dim and bool(np.all(np.abs(self.entries - other.entries) <= tol))

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def __repr__(self):
        return f"GroupElement({self.entries.tolist()!r})"


# ---------------------------------------------------------------------------
# reduction


def _normalize_signs(basis: np.ndarray, unimod: np.ndarray, tol: float = 1e-12):
    """Flip columns so the first non-negligible coordinate is positive."""
    basis = basis.copy()
    unimod = unimod.copy()
    for j in range(basis.shape[1]):
        col = basis[:, j]
        scale = np.max(np.abs(col))
        nz = np.flatnonzero(np.abs(col) > tol * scale)
        if nz.size and col[nz[0]] < 0:
            basis[:, j] = -col
            unimod[:, j] = -unimod[:, j]
    return basis, unimod


def gauss_reduce(basis: np.ndarray):
    """Lagrange-Gauss reduction of a 2 x 2 basis.

    Returns ``(reduced, U)`` with ``reduced = basis @ U`` and ``|b1| <= |b2|``,
    ``|<b1, b2>| <= |b1|^2 / 2``.
    """
    b = np.array(basis, dtype=float)
    u = np.eye(2)
    b1, b2 = b[:, 0].copy(), b[:, 1].copy()
    u1, u2 = u[:, 0].copy(), u[:, 1].copy()
    if b1 @ b1 > b2 @ b2:
        b1, b2, u1, u2 = b2, b1, u2, u1
    for _ in range(1_000):
        m = round((b1 @ b2) / (b1 @ b1))
        if m:
            b2 = b2 - m * b1
            u2 = u2 - m * u1
        if b2 @ b2 < b1 @ b1:
            b1, b2, u1, u2 = b2, b1, u2, u1
        elif m == 0:
            break
    else:
        raise SingularBasisError("Gauss reduction did not terminate")
    return np.column_stack([b1, b2]), np.column_stack([u1, u2])


def _gram_schmidt(b: np.ndarray):
    d = b.shape[1]
    bstar = np.zeros_like(b)
    mu = np.zeros((d, d))
    for i in range(d):
        v = b[:, i].copy()
        for j in range(i):
            mu[i, j] = (b[:, i] @ bstar[:, j]) / (bstar[:, j] @ bstar[:, j])
            v -= mu[i, j] * bstar[:, j]
        bstar[:, i] = v
    return bstar, mu


def lll_reduce(basis: np.ndarray, delta: float = LLL_DELTA):
    """Floating-point LLL reduction (columns are basis vectors).

    Returns ``(reduced, U)`` with ``reduced = basis @ U``, ``U`` integral unimodular.
    """
    b = np.array(basis, dtype=float)
    d = b.shape[1]
    u = np.eye(d)
    bstar, mu = _gram_schmidt(b)
    norms = np.einsum("ij,ij->j", bstar, bstar)
    k = 1
    steps = 0
    while k < d:
        steps += 1
        if steps > 100_000:
            raise SingularBasisError("LLL did not terminate")
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q:
                b[:, k] -= q * b[:, j]
                u[:, k] -= q * u[:, j]
                mu[k, :j] -= q * mu[j, :j]
                mu[k, j] -= q
        if norms[k] >= (delta - mu[k, k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[:, [k - 1, k]] = b[:, [k, k - 1]]
            u[:, [k - 1, k]] = u[:, [k, k - 1]]
            bstar, mu = _gram_schmidt(b)
            norms = np.einsum("ij,ij->j", bstar, bstar)
            k = max(k - 1, 1)
    return b, u


def reduce_basis(basis: np.ndarray):
    """Deterministically reduce a basis: Gauss for d = 2, LLL(0.99) otherwise.

    Returns ``(reduced, U)`` where ``U`` is the integral change of basis.
    Raises SingularBasisError when the reduced basis has condition number
    above 1e12 (lambda_d / lambda_1 beyond what doubles resolve).
    """
    b = np.asarray(basis, dtype=float)
    if not np.all(np.isfinite(b)) or np.linalg.det(b) == 0:
        raise SingularBasisError("basis is singular")
    if b.shape[0] == 2:
        red, u = gauss_reduce(b)
    else:
        red, u = lll_reduce(b)
    if np.linalg.cond(red) > COND_LIMIT:
        raise SingularBasisError("basis is numerically singular (condition number > 1e12)")
    u = np.round(u)
    return _normalize_signs(red, u)


# ---------------------------------------------------------------------------
# enumeration


def enumerate_short_vectors(reduced: np.ndarray, radius: float, budget: int = ENUM_BUDGET,
                            rel_tol: float = 1e-10):
    """All nonzero lattice vectors of length <= radius (closed ball).

    Fincke-Pohst enumeration over the Gram-Schmidt data of ``reduced``.
    Returns ``(coeffs, vectors)`` with integer coefficient rows; each pair
    ``{v, -v}`` appears twice.  Raises EnumerationBudgetExceeded past
    ``budget`` visited nodes.
    """
    b = np.asarray(reduced, dtype=float)
    d = b.shape[1]
    bstar, mu = _gram_schmidt(b)
    nstar = np.einsum("ij,ij->j", bstar, bstar)
    r2 = radius * radius * (1.0 + rel_tol)
    out = []
    coeff = np.zeros(d, dtype=np.int64)
    visited = 0

    # iterative depth-first search from the last coordinate down
    def recurse(level: int, partial: float):
        nonlocal visited
        center = -sum(mu[j, level] * coeff[j] for j in range(level + 1, d))
        span = math.sqrt(max(r2 - partial, 0.0) / nstar[level])
        lo = math.ceil(center - span)
        hi = math.floor(center + span)
        for c in range(lo, hi + 1):
            visited += 1
            if visited > budget:
                raise EnumerationBudgetExceeded(
                    f"enumeration exceeded {budget} candidates (radius {radius:g})")
            t = partial + (c - center) ** 2 * nstar[level]
            if t > r2:
                continue
            coeff[level] = c
            if level == 0:
                if np.any(coeff):
                    out.append(coeff.copy())
            else:
                recurse(level - 1, t)
        coeff[level] = 0

    recurse(d - 1, 0.0)
    if not out:
        return np.zeros((0, d), dtype=np.int64), np.zeros((0, d))
    coeffs = np.array(out)
    vecs = coeffs @ b.T
    # exact closed-ball filter on the actual vectors
    keep = np.einsum("ij,ij->i", vecs, vecs) <= r2
    return coeffs[keep], vecs[keep]


def hermite_bound(d: int) -> float:
    """Upper bound on lambda_1 of a covolume-one lattice, (4/3)^((d-1)/4)."""
    return (4.0 / 3.0) ** ((d - 1) / 4.0)


def minkowski_constant(d: int) -> float:
    """2^d / vol(unit ball): upper bound for the product of successive minima."""
    vol = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    return 2.0**d / vol


# ---------------------------------------------------------------------------
# lattice points


class LatticePoint:
    """A covolume-one lattice given by a basis (columns generate the lattice).

    Derived quantities are computed lazily and cached; instances are treated
    as immutable.
    """

    def __init__(self, basis):
        b = np.array(basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError("basis must be a square matrix")
        if not 2 <= b.shape[0] <= MAX_DIM:
            raise ValueError(f"dimension must be in [2, {MAX_DIM}]")
        det = abs(np.linalg.det(b))
        if abs(det - 1.0) > 1e-6:
            raise ValueError(f"lattice must have covolume 1 (got {det!r})")
        if abs(det - 1.0) > RENORM_TOL:
            b = b / det ** (1.0 / b.shape[0])
        b.setflags(write=False)
        self.basis = b
        self.dim = b.shape[0]

    @classmethod
    def standard(cls, d: int) -> LatticePoint:
        return cls(np.eye(d))

    @cached_property
    def _reduction(self):
        red, u = reduce_basis(self.basis)
        red.setflags(write=False)
        u.setflags(write=False)
        return red, u

    @property
    def reduced_basis(self) -> np.ndarray:
        return self._reduction[0]

    @property
    def unimodular(self) -> np.ndarray:
        """Integer matrix ``U`` with ``reduced_basis = basis @ U``."""
        return self._reduction[1]

    @cached_property
    def lambda1(self) -> float:
        return shortest_vector_length(self)

    @cached_property
    def minima(self) -> np.ndarray:
        return successive_minima(self)

    @property
    def height(self) -> float:
        return 1.0 / self.lambda1

    def same_lattice(self, other: LatticePoint, tol: float = 1e-6) -> bool:
        """True when the two bases differ by an integral unimodular matrix."""
        if other.dim != self.dim:
            return False
        u = np.linalg.solve(self.basis, other.basis)
        ru = np.round(u)
        return bool(np.all(np.abs(u - ru) <= tol) and abs(abs(np.linalg.det(ru)) - 1) <= tol)

    def __repr__(self):
        return f"LatticePoint({self.basis.tolist()!r})"


def apply_group(g: GroupElement, x: LatticePoint) -> LatticePoint:
    """The lattice ``g x`` (basis ``g @ basis``)."""
    if g.dim != x.dim:
        raise ValueError(f"dimension mismatch: {g.dim} vs {x.dim}")
    return LatticePoint(g.entries @ x.basis)


def shortest_vector_length(x: LatticePoint, budget: int = ENUM_BUDGET) -> float:
    """Exact lambda_1 by enumeration inside the first reduced vector's ball."""
    red = x.reduced_basis
    if x.dim == 2:
        # Gauss-reduced b1 is a shortest vector
        return float(np.linalg.norm(red[:, 0]))
    radius = float(np.min(np.linalg.norm(red, axis=0)))
    _, vecs = enumerate_short_vectors(red, radius, budget=budget)
    return float(np.sqrt(np.min(np.einsum("ij,ij->i", vecs, vecs))))


def successive_minima(x: LatticePoint, budget: int = ENUM_BUDGET) -> np.ndarray:
    """(lambda_1, ..., lambda_d) by enumeration and greedy independence."""
    red = x.reduced_basis
    d = x.dim
    lengths = np.linalg.norm(red, axis=0)
    if d == 2:
        return np.sort(lengths)
    # the sorted reduced basis lengths bound lambda_i from above
    radius = float(np.max(lengths))
    _, vecs = enumerate_short_vectors(red, radius, budget=budget)
    norms = np.sqrt(np.einsum("ij,ij->i", vecs, vecs))
    order = np.argsort(norms, kind="stable")
    chosen = []
    q = np.zeros((d, 0))
    for i in order:
        v = vecs[i]
        resid = v - q @ (q.T @ v)
        if np.linalg.norm(resid) > 1e-9 * norms[i]:
            chosen.append(norms[i])
            q = np.column_stack([q, resid / np.linalg.norm(resid)])
            if len(chosen) == d:
                break
    if len(chosen) < d:  # pragma: no cover
        raise RuntimeError("failed to find d independent vectors")
    return np.array(chosen)


def height(x: LatticePoint) -> float:
    """Height 1 / lambda_1."""
    return x.height
