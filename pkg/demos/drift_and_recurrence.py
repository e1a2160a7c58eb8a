"""
A drift function and what it buys
=================================

V(x) = 1 + eps * lambda_1(x)^(-delta) is large exactly when the lattice has a
very short vector.  For the conjugated walk the expected value of V after n0
steps is at most alpha V + beta with alpha < 1, which we fit from simulated
probes.  Such a bound forces the walk back into a fixed sublevel set of V, and
does so uniformly over starting points in slowly growing sets.
"""

import latwalk as lw
from latwalk.lyapunov import calibrated_epsilon, probe_points
from latwalk.presets import conjugated_pair

mu = conjugated_pair()
delta, v_max = 0.5, 1e3
eps = calibrated_epsilon(delta, v_max)


def probes_for(spec):
    return probe_points(spec, 30, v_max, seed=11, d=2)


res = lw.sweep_contraction(mu, probes_for, 5_000, seed=7, epsilon=eps, deltas=[delta],
                           n0s=range(1, 13), target=0.5)
fit = res.fit
print(f"delta={delta} eps={eps:.3f}: n0={fit.spec.n0} alpha={fit.alpha:.3f} beta={fit.beta:.2f}")
for v, dr in sorted(zip(fit.values, fit.drifts))[::6]:
    print(f"  V={v:9.2f}  E[V after n0 steps]={dr:9.2f}")

spec = fit.fitted_spec()
rec = lw.recurrence_experiment(mu, spec, lw.GrowthProfile("polynomial", 2), 0.1, [spec.n0, 2 * spec.n0],
                               5_000, seed=13, points_per_level=3)
print(f"\nrecurrence set V <= {rec.threshold:.1f}")
for n, (esc, esc_se, ces, ces_se, bound) in sorted(rec.sup_by_n().items()):
    print(f"  n={n:2d} worst escape {esc:.3f} (bound {bound:.3f}), worst Cesaro escape {ces:.3f}")

# starting deep in the cusp: one step of the walk barely moves V, many steps bring it down
spec1 = lw.LyapunovSpec(epsilon=eps, delta=delta)
x = lw.sublevel_sample(spec1, 500.0, 1, seed=2)[0]
print(f"\nstart V={lw.evaluate_V(spec1, x):.1f}")
for n in (1, 10, 40):
    y = lw.sample_trajectory(mu, n, x, seed=n)
    print(f"  one trajectory after {n:2d} steps: V={lw.evaluate_V(spec1, y):.2f}")
