"""End-to-end acceptance runs, one named preset per criterion."""

import time
from fractions import Fraction

import numpy as np
import pytest

import latwalk.chain as fc
from latwalk.cli import EXPERIMENTS, resolve, run
from latwalk.presets import H1, H2


def run_preset(name, out):
    kind, _ = EXPERIMENTS[name]
    t0 = time.perf_counter()
    meta = run(kind, resolve(kind, name, {}, {}), out, name)
    return meta, time.perf_counter() - t0


def test_criterion_1_finite_chain_exactness(tmp_path, report_criterion):
    meta, elapsed = run_preset("criterion-1", tmp_path)
    res = meta["results"]

    q = 2
    h1, h2 = fc.ModGroupElement(H1, q), fc.ModGroupElement(H2, q)
    x0 = fc.ModGroupElement.identity(2, q)
    expect = [{x0, h1 @ h2 @ x0, h2 @ h1 @ x0}, {h1 @ x0, h2 @ x0, h1 @ h2 @ h1 @ x0}]
    chain = fc.enumerate_orbit([h1, h2], x0)
    period, classes = fc.chain_period(chain)
    got = [{chain.states[i] for i in c} for c in classes]
    two = chain.power(2).restrict(classes[0])
    stat = fc.stationary_distribution(two)
    spec = sorted(np.round(np.real(fc.chain_spectrum(chain).eigenvalues), 12))

    ok = (res["states"] == 6 and period == 2 and res["period"] == 2
          and sorted(map(frozenset, got), key=len) == sorted(map(frozenset, expect), key=len)
          and got[0] == expect[0]
          and stat == [Fraction(1, 3)] * 3 and all(isinstance(p, Fraction) for p in stat)
          and meta["checks"]["limit_within_1e-10"]
          and spec == [-1.0, -0.5, -0.5, 0.5, 0.5, 1.0]
          and elapsed < 1.0)
    report_criterion(1, ok, f"states={res['states']} period={period} l1(n=40)={res['l1_error_at_n_max']:.2e} "
                            f"two-step stationary={[str(p) for p in stat]} {elapsed:.2f}s")
    assert ok


def test_criterion_2_periodicity_witness(tmp_path, report_criterion):
    meta, elapsed = run_preset("criterion-2", tmp_path)
    res = meta["results"]
    ok = (meta["checks"]["witness_holds"] and res["witness_checked_to"] >= 40
          and res["period_with_identity_atom"] == 1 and elapsed < 1.0)
    report_criterion(2, ok, f"witness to n={res['witness_checked_to']} holds={res['witness_holds']} "
                            f"period with identity atom={res['period_with_identity_atom']} {elapsed:.2f}s")
    assert ok


def test_criterion_3_haar_oracle(tmp_path, report_criterion):
    meta, elapsed = run_preset("criterion-3", tmp_path)
    import csv
    with open(tmp_path / "data.csv") as fh:
        rows = list(csv.DictReader(fh))
    ok = meta["checks"]["oracle_agreement"] and len(rows) == 2 and elapsed < 120
    detail = " ".join(f"r={float(r['radius'])}: z={float(r['z']):+.2f} rel={float(r['relative_error']):.1e}"
                      for r in rows)
    report_criterion(3, ok, f"{detail} {elapsed:.1f}s")
    assert ok


def test_criterion_4_equidistribution_decay(tmp_path, report_criterion):
    meta, elapsed = run_preset("criterion-4", tmp_path)
    res = meta["results"]
    ok = meta["checks"]["falls_below_floor"] and meta["checks"]["negative_slope"] and elapsed < 600
    report_criterion(4, ok, f"first below floor n={res['first_below_floor']} slope={res['slope']:.3f} "
                            f"{elapsed:.1f}s")
    assert ok


def test_criterion_5_progression_cesaro(tmp_path, report_criterion):
    meta, elapsed = run_preset("criterion-5", tmp_path)
    err = meta["results"]["progression_cesaro_l1_error"]
    ok = meta["checks"]["progression_cesaro_within_1e-6"] and elapsed < 1.0
    report_criterion(5, ok, "l1 error at n=30: " + " ".join(f"r={r}: {e:.4g}" for r, e in err.items())
                            + f" (tolerance 1e-6) {elapsed:.2f}s")
    assert ok


def test_criterion_6_lyapunov_contraction(tmp_path, report_criterion):
    meta, elapsed = run_preset("criterion-6", tmp_path)
    res, checks = meta["results"], meta["checks"]
    ok = (checks["alpha_meets_target"] and checks.get("fresh_fraction_at_least_0.95", False)
          and elapsed < 600)
    report_criterion(6, ok, f"delta={res['delta']} n0={res['n0']} alpha={res['alpha']:.3f} "
                            f"beta={res['beta']:.3g} fresh={res.get('fresh_fraction')} {elapsed:.1f}s")
    assert ok


def test_criterion_7_recurrence_bound(tmp_path, report_criterion):
    meta, elapsed = run_preset("criterion-7", tmp_path)
    res, checks = meta["results"], meta["checks"]
    ok = checks["cesaro_escape_within_tol"] and checks["escape_within_bound"] and elapsed < 600
    report_criterion(7, ok, f"n0={res['n0']} alpha={res['alpha']:.3f} beta={res['beta']:.3g} "
                            f"max cesaro escape={res['max_cesaro_escape']:.3g} {elapsed:.1f}s")
    assert ok


@pytest.mark.slow
def test_criterion_8_uniform_cesaro(tmp_path, report_criterion):
    meta, elapsed = run_preset("criterion-8", tmp_path)
    res = meta["results"]
    sup = res["sup"]
    ok = meta["checks"]["sup_decreases"] and elapsed < 600
    report_criterion(8, ok, "sup |D|: " + " ".join(f"n={n}: {v['value']:.4g}" for n, v in sup.items())
                            + f" gap={res['gap']:.4g} vs 3se={3 * res['combined_std_error']:.3g} {elapsed:.1f}s")
    assert ok


def test_criterion_9_cross_module(tmp_path, report_criterion):
    meta, elapsed = run_preset("criterion-9", tmp_path)
    res = meta["results"]
    ok = meta["checks"]["within_3_std_errors"] and elapsed < 60
    report_criterion(9, ok, f"states={res['states']} max|z|={res['max_abs_z']:.2f} {elapsed:.1f}s")
    assert ok
