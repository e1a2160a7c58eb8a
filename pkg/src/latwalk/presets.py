"""Named step measures used throughout the experiments."""

from __future__ import annotations

import numpy as np

from .lattice import GroupElement
from .walk import StepMeasure

H1 = np.array([[1, 1], [0, 1]])
H2 = np.array([[1, 0], [1, 1]])

# diag(2^{1/4}, 2^{-1/4}); the diagonal of its square is irrational
CONJUGATOR = GroupElement.diag(2**0.25, 2**-0.25)


def unipotent_pair() -> StepMeasure:
    """(delta_{h1} + delta_{h2}) / 2 with the standard unipotent generators of SL_2(Z)."""
    return StepMeasure([H1, H2], [0.5, 0.5])


def conjugated_pair(a: GroupElement = CONJUGATOR) -> StepMeasure:
    """The unipotent pair conjugated by ``a``: atoms ``a h_i a^-1``."""
    return unipotent_pair().conjugate(a)


def lazy_unipotent_pair() -> StepMeasure:
    """h1, h2 and the identity, weight 1/3 each."""
    return StepMeasure([H1, H2, np.eye(2)], [1 / 3, 1 / 3, 1 / 3])


def product_walk(a: GroupElement = CONJUGATOR) -> StepMeasure:
    """Four-atom walk on X x X, embedded block-diagonally in SL_4(R).

    Atoms are (h1, a h1 a^-1), (h1, 1), (h2, a h2 a^-1), (h2, 1).
    """
    ah = [GroupElement(h).conjugate(a).entries for h in (H1, H2)]
    eye = np.eye(2)

    def block(p, q):
        m = np.zeros((4, 4))
        m[:2, :2] = p
        m[2:, 2:] = q
        return m

    atoms = [block(H1, ah[0]), block(H1, eye), block(H2, ah[1]), block(H2, eye)]
    return StepMeasure(atoms, [0.25] * 4)


def simmons_weiss(c=(2.0, 2.0), shifts=(0.0, 1.0), probs=(0.5, 0.5)) -> StepMeasure:
    """Upper-triangular walk on SL_2(R)/SL_2(Z): ``g_i = [[c_i, y_i], [0, 1/c_i]]``.

    This is the one-dimensional case of the block construction
    ``[[c_i O_i, y_i], [0, c_i^{-d}]]`` with ``O_i = 1``; ``shifts[0]`` must be 0
    and the remaining shifts span R.
    """
    if shifts[0] != 0:
        raise ValueError("the first translation must vanish")
    if not any(s != 0 for s in shifts[1:]):
        raise ValueError("translations must span R")
    if any(ci <= 1 for ci in c):
        raise ValueError("contraction ratios must exceed 1")
    atoms = [np.array([[ci, yi], [0.0, 1.0 / ci]]) for ci, yi in zip(c, shifts)]
    return StepMeasure(atoms, probs)


MEASURES = {
    "example-2.1": unipotent_pair,
    "conjugated": conjugated_pair,
    "lazy-2.1": lazy_unipotent_pair,
    "example-2.2-product": product_walk,
    "simmons-weiss": simmons_weiss,
}
