"""
Counting lattice points along a random walk
===========================================

The Siegel transform of the indicator of a disc of radius r counts nonzero
lattice vectors in that disc.  Its average over all unimodular lattices is the
area of the disc.  We check that against a direct Haar sampler, then follow the
discrepancy along two walks started at Z^2: one with irrational conjugation,
which spreads out, and one with integer generators, which is trapped on a
finite orbit and never sees the Haar average.
"""

import math

import numpy as np

import latwalk as lw
from latwalk.equidist import haar_mean
from latwalk.presets import conjugated_pair, unipotent_pair

disc = lw.SiegelObservable(1.5)
print("Z^2 has", lw.siegel_transform(disc, lw.LatticePoint.standard(2)), "nonzero vectors within 1.5")

# Haar average vs the area of the disc
m, se = haar_mean(disc, lw.HaarSampler2D(seed=1), 200_000)
print(f"Haar sampler {m:.4f} +/- {se:.4f}, disc area {lw.haar_expectation(disc):.4f}")

# shortest vectors of Haar-random lattices respect the Hermite bound
lam = np.array([p.lambda1 for p in lw.haar_sample_2d(lw.HaarSampler2D(2), 5000)])
print(f"max lambda_1^2 over 5000 draws: {lam.max() ** 2:.4f}  (bound {2 / math.sqrt(3):.4f})")

x0 = lw.LatticePoint.standard(2)
rep = lw.equidistribution_report(conjugated_pair(), x0, disc, 30, 20_000, seed=5)
print(f"\nconjugated walk: noise floor {rep.noise_floor:.3f}, first below at n = {rep.first_below}")
print(f"log-discrepancy slope {rep.fit.slope:.3f} per step")
for n, d, s in zip(rep.series.n_values[:12], rep.series.estimates, rep.series.std_errors):
    print(f"  n={int(n):2d}  D={d:+.4f}  se={s:.4f}")

# integer generators: the walk stays in SL_2(Z) . Z^2 = {Z^2}, the count is always 8
flat = lw.equidistribution_report(unipotent_pair(), x0, disc, 10, 2_000, seed=5)
print("\ninteger walk discrepancies:", np.round(flat.series.estimates, 4))
