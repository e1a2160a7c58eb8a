"""
A periodic walk on a finite quotient
====================================

The two unipotent generators h1 = [[1,1],[0,1]] and h2 = [[1,0],[1,1]] act on
SL_2(Z/2Z), a group of order 6.  Every step flips a parity, so the walk started
at the identity alternates between two cyclic classes and never settles in
distribution.  It does settle along even and odd times separately.
"""

import numpy as np

import latwalk as lw
from latwalk.presets import H1, H2
from latwalk.walk import residue_indicator

q = 2
gens = [lw.ModGroupElement(h, q) for h in (H1, H2)]
start = lw.ModGroupElement.identity(2, q)

chain = lw.enumerate_orbit(gens, start)
period, classes = lw.chain_period(chain)
print(f"{len(chain)} states, period {period}")
for c, members in enumerate(classes):
    print(f"class O{c + 1}:", [chain.states[i].entries.tolist() for i in members])

# exact laws in rationals: the mass alternates between the classes
for n in (0, 1, 2, 3, 10, 11):
    law = lw.exact_distribution(chain, 0, n)
    print(n, [str(p) for p in law])

# eigenvalues of the transition matrix; -1 is the signature of period 2
spec = lw.chain_spectrum(chain)
print("spectrum:", np.round(spec.eigenvalues.real, 6))

# the two-step chain on one class is aperiodic with a uniform limit
two = chain.power(2).restrict(classes[0])
print("two-step stationary law:", [str(p) for p in lw.stationary_distribution(two)])

# a lazy step kills the periodicity
lazy = lw.enumerate_orbit(gens + [lw.ModGroupElement.identity(2, q)], start)
print("period with an identity atom:", lw.chain_period(lazy)[0])

# Monte Carlo on the real lattice, reduced mod 2, agrees with the exact law
mu = lw.StepMeasure([H1, H2], [0.5, 0.5])
for n in (5, 10):
    exact = lw.exact_distribution(chain, 0, n)
    target = chain.states[int(np.argmax([float(p) for p in exact]))].entries
    est = lw.estimate_pushforward(mu, n, lw.LatticePoint.standard(2), residue_indicator([target], q),
                                  50_000, seed=3, modulus=q)
    print(f"n={n}: simulated {est.mean:.4f} +/- {est.std_error:.4f}, exact {float(max(exact)):.4f}")
