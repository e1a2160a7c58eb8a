"""Command-line experiment harness.

    latwalk <kind> [--preset NAME] [--config FILE] [--seed N] [--out DIR] [--threads N]

``kind`` is one of chain, walk, lyapunov, recurrence, equidist, uniform-cesaro.
A run writes ``data.csv`` (the table) and ``metadata.json`` (resolved config,
seed, library versions, chunk layout, summary results and checks) into the
output directory.  Exit status: 0 success, 2 invalid configuration,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import platform
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import chain as fc
from . import presets
from .equidist import (SiegelObservable, HaarSampler2D, equidistribution_report, haar_expectation,
                       haar_mean, uniform_cesaro_experiment)
from .lattice import EnumerationBudgetExceeded, LatticePoint, SingularBasisError
from .lyapunov import (GrowthProfile, LyapunovSpec, NoContraction, calibrated_epsilon, drift_holds,
                       estimate_drift, evaluate_V, probe_points, recurrence_experiment,
                       sweep_contraction)
from .rng import derive_key
from .walk import StepMeasure, WalkConfig, pushforward_series, simulate

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
KINDS = ("chain", "walk", "lyapunov", "recurrence", "equidist", "uniform-cesaro")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config schema: key -> (parser, default); every value arrives as text


def _ints(s):
    out = []
    for part in str(s).replace(" ", "").split(","):
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(float(part)))
    return out


def _floats(s):
    return [float(x) for x in str(s).replace(" ", "").split(",") if x]


def _fractions(s):
    return [Fraction(x) for x in str(s).replace(" ", "").split(",") if x]


def _count(s):
    v = float(s)
    if v != int(v) or v < 1:
        raise ValueError(f"expected a positive integer, got {s!r}")
    return int(v)


def _bool(s):
    t = str(s).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _phi(s):
    kind, _, param = str(s).partition(":")
    return GrowthProfile(kind.strip(), float(param) if param else 1.0)


def _epsilon(s):
    return "auto" if str(s).strip() == "auto" else float(s)


SCHEMA = {
    "generators": (str, None),
    "weights": (_fractions, None),
    "c": (float, 2.0),
    "m": (int, 1),
    "modulus": (int, None),
    "start": (str, None),
    "d": (int, None),
    "n_max": (int, 20),
    "n_list": (_ints, None),
    "samples": (_count, 10_000),
    "seed": (int, 1),
    "threads": (_count, 1),
    "chunk_size": (_count, 1 << 15),
    "epsilon": (_epsilon, "auto"),
    "delta": (_floats, [0.125, 0.25, 0.5]),
    "n0": (_ints, list(range(1, 21))),
    "target": (float, 0.99),
    "probes": (_count, 50),
    "v_max": (float, 1e3),
    "phi": (_phi, GrowthProfile("constant", 1.0)),
    "tol": (float, 0.1),
    "radius": (float, 1.5),
    "radii": (_floats, [0.8, 1.5]),
    "profile": (str, "indicator"),
    "mode": (str, "walk"),
    "haar_draws": (_count, 10**6),
    "points_per_level": (_count, 5),
    "ap_n": (_count, 30),
    "check_fresh": (_bool, True),
}

# one preset per acceptance criterion; values are config text
EXPERIMENTS = {
    "criterion-1": ("chain", {"generators": "example-2.1", "modulus": "2", "n_max": "40"}),
    "criterion-2": ("chain", {"generators": "example-2.1", "modulus": "2", "n_max": "40"}),
    "criterion-3": ("equidist", {"mode": "haar", "radii": "0.8,1.5", "haar_draws": "1000000"}),
    "criterion-4": ("equidist", {"generators": "conjugated", "radius": "1.5", "samples": "100000",
                                 "n_max": "50"}),
    "criterion-5": ("chain", {"generators": "example-2.1", "modulus": "2", "n_max": "40",
                              "ap_n": "30"}),
    "criterion-6": ("lyapunov", {"generators": "conjugated", "samples": "10000", "probes": "50",
                                 "v_max": "1000", "target": "0.99"}),
    "criterion-7": ("recurrence", {"generators": "conjugated", "samples": "10000", "probes": "50",
                                   "v_max": "1000", "delta": "0.5", "target": "0.5",
                                   "tol": "0.1", "phi": "polynomial:2",
                                   "n_list": "4,9,12,16,20,30", "points_per_level": "5"}),
    "criterion-8": ("uniform-cesaro", {"generators": "simmons-weiss", "m": "1", "c": "2",
                                       "epsilon": "1", "delta": "0.5", "phi": "polynomial:1",
                                       "radius": "1.2", "n_list": "10,100",
                                       "points_per_level": "20", "samples": "10000"}),
    "criterion-9": ("walk", {"generators": "example-2.1", "modulus": "2", "n_list": "5,10,20",
                             "samples": "100000"}),
}


def read_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines (``#`` comments allowed)."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return dict(parser["run"])


def resolve(kind: str, preset: str | None, raw: dict, overrides: dict) -> dict:
    """Merge preset, file and flag values and parse them against the schema."""
    merged: dict = {}
    if preset is not None:
        if preset in EXPERIMENTS:
            pkind, values = EXPERIMENTS[preset]
            if pkind != kind:
                raise ConfigError(f"preset {preset!r} is a {pkind} experiment, not {kind}")
            merged.update(values)
        elif preset in presets.MEASURES:
            merged["generators"] = preset
        else:
            raise ConfigError(f"unknown preset {preset!r}")
    merged.update(raw)
    merged.update({k: str(v) for k, v in overrides.items() if v is not None})
    unknown = sorted(set(merged) - set(SCHEMA))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    cfg = {}
    for key, (parse, default) in SCHEMA.items():
        if key in merged:
            try:
                cfg[key] = parse(merged[key])
            except (ValueError, TypeError, ArithmeticError) as exc:
                raise ConfigError(f"bad value for {key}: {exc}") from None
        else:
            cfg[key] = default
    needs_generators = not (kind == "equidist" and cfg["mode"] == "haar")
    if needs_generators and not cfg["generators"]:
        raise ConfigError("no generators given (set 'generators' or use --preset)")
    return cfg


def _matrices(text: str):
    mats = []
    for block in text.split("|"):
        rows = [[float(v) for v in r.split()] for r in block.strip().split(";") if r.strip()]
        mats.append(np.array(rows))
    return mats


def build_measure(cfg: dict) -> StepMeasure:
    name = cfg["generators"]
    if name == "simmons-weiss":
        if cfg["m"] != 1:
            raise ConfigError("only the m = 1 block form is available")
        mu = presets.simmons_weiss(c=(cfg["c"], cfg["c"]))
    elif name in presets.MEASURES:
        mu = presets.MEASURES[name]()
    else:
        try:
            mats = _matrices(name)
        except ValueError:
            raise ConfigError(f"generators is neither a preset nor a matrix list: {name!r}") from None
        mu = StepMeasure(mats)
    if cfg["weights"] is not None:
        mu = StepMeasure(mu.atoms, [float(w) for w in cfg["weights"]])
    if cfg["d"] is not None and cfg["d"] != mu.dim:
        raise ConfigError(f"d = {cfg['d']} does not match the generators (d = {mu.dim})")
    return mu


def start_point(cfg: dict, d: int) -> LatticePoint:
    if cfg["start"] is None:
        return LatticePoint.standard(d)
    return LatticePoint(_matrices(cfg["start"])[0])


def _walk_config(cfg):
    return WalkConfig(chunk_size=cfg["chunk_size"], threads=cfg["threads"])


def _frac(x: Fraction) -> str:
    return str(x)


def _residue_text(m) -> str:
    return ";".join(" ".join(str(int(v)) for v in row) for row in np.asarray(m))


# ---------------------------------------------------------------------------
# experiments: each returns (columns, rows, results, checks)


def run_chain(cfg):
    mu = build_measure(cfg)
    q = cfg["modulus"]
    if q is None:
        raise ConfigError("chain analysis needs a modulus")
    if not mu.is_integral:
        raise ConfigError("chain analysis needs integral generators")
    weights = cfg["weights"] or [Fraction(1, len(mu))] * len(mu)
    gens = [fc.ModGroupElement(np.rint(a.entries).astype(np.int64), q) for a in mu.atoms]
    start = fc.ModGroupElement(np.rint(start_point(cfg, mu.dim).basis).astype(np.int64), q)
    ch = fc.enumerate_orbit(gens, start, weights=weights)
    period, classes = fc.chain_period(ch)
    label = {s: f"O{c + 1}" for c, states in enumerate(classes) for s in states}
    stationary = fc.stationary_distribution(ch)
    # limit along n = n_max mod period: stationary mass renormalized on the current class
    n_max = cfg["n_max"]
    cur = classes[n_max % period]
    class_mass = sum(stationary[i] for i in cur)
    limit = [stationary[i] / class_mass if i in cur else Fraction(0) for i in range(len(ch))]
    laws = fc.distributions(ch, 0, n_max)
    columns = ["n", "state", "residue", "class", "period", "probability", "stationary"]
    rows = []
    for n, law in enumerate(laws):
        for i, p in enumerate(law):
            rows.append([n, i, _residue_text(ch.states[i].entries), label[i], period, _frac(p),
                         _frac(stationary[i])])
    err_n = float(sum(abs(a - b) for a, b in zip(laws[n_max], limit)))
    spectrum = fc.chain_spectrum(ch)
    witness = fc.periodicity_witness(ch, n_max)
    two = ch.power(period).restrict(classes[0]) if period > 1 else ch
    two_stat = fc.stationary_distribution(two)
    two_spec = fc.chain_spectrum(two)
    lazy = fc.enumerate_orbit(gens + [fc.ModGroupElement.identity(mu.dim, q)], start)
    lazy_period, _ = fc.chain_period(lazy)
    ap = {}
    for r in range(period):
        ces = fc.cesaro_distribution(ch, 0, cfg["ap_n"], period, r)
        mass = sum(stationary[i] for i in classes[r])
        target = [stationary[i] / mass if i in classes[r] else Fraction(0) for i in range(len(ch))]
        ap[r] = float(sum(abs(a - b) for a, b in zip(ces, target)))
    results = {
        "states": len(ch),
        "period": period,
        "classes": [[_residue_text(ch.states[i].entries) for i in c] for c in classes],
        "stationary": [_frac(p) for p in stationary],
        "eigenvalues": [[float(z.real), float(z.imag)] for z in spectrum.eigenvalues],
        "second_modulus": spectrum.second_modulus,
        "power_chain_stationary": [_frac(p) for p in two_stat],
        "power_chain_eigenvalues": [float(z.real) for z in two_spec.eigenvalues],
        "l1_error_at_n_max": err_n,
        "witness_holds": witness.holds,
        "witness_checked_to": witness.n_checked,
        "period_with_identity_atom": lazy_period,
        "progression_cesaro_l1_error": {str(r): e for r, e in ap.items()},
    }
    checks = {
        "limit_within_1e-10": err_n <= 1e-10,
        "witness_holds": witness.holds,
        "identity_atom_aperiodic": lazy_period == 1,
        "progression_cesaro_within_1e-6": all(e <= 1e-6 for e in ap.values()),
    }
    return columns, rows, results, checks


def run_walk(cfg):
    mu = build_measure(cfg)
    x0 = start_point(cfg, mu.dim)
    n_list = cfg["n_list"] or list(range(cfg["n_max"] + 1))
    N, seed, wc = cfg["samples"], cfg["seed"], _walk_config(cfg)
    q = cfg["modulus"]
    if q is None:
        obs = SiegelObservable(cfg["radius"], mu.dim, cfg["profile"])
        s = pushforward_series(mu, n_list, x0, obs, N, seed, config=wc)
        columns = ["n", "estimate", "std_error", "haar_expectation"]
        ref = haar_expectation(obs)
        rows = [[int(n), float(e), float(se), ref] for n, e, se in zip(s.n_values, s.estimates, s.std_errors)]
        return columns, rows, {"observable": obs.kind, "radius": obs.radius}, {}
    gens = [fc.ModGroupElement(np.rint(a.entries).astype(np.int64), q) for a in mu.atoms]
    start = fc.ModGroupElement(np.rint(x0.basis).astype(np.int64), q)
    ch = fc.enumerate_orbit(gens, start, weights=[Fraction(w).limit_denominator(10**9) for w in mu.weights])
    key = derive_key(seed, "pushforward")
    n_list = sorted(set(n_list))
    codes = {st.key: i for i, st in enumerate(ch.states)}

    def state_code(res):
        return np.array([codes[np.ascontiguousarray(r).tobytes()] for r in res], dtype=float)

    vals = simulate(mu, x0, n_list, N, key, state_code, modulus=q, config=wc)
    columns = ["n", "state", "residue", "estimate", "std_error", "exact", "z"]
    rows = []
    worst = 0.0
    for n in n_list:
        exact = fc.exact_distribution(ch, 0, n)
        for i in range(len(ch)):
            hit = (vals[n] == i).astype(float)
            est = float(hit.mean())
            se = float(hit.std(ddof=1) / math.sqrt(N)) if N > 1 else 0.0
            ex = float(exact[i])
            z = (est - ex) / se if se > 0 else (0.0 if est == ex else math.inf)
            worst = max(worst, abs(z))
            rows.append([n, i, _residue_text(ch.states[i].entries), est, se, ex, z])
    return columns, rows, {"states": len(ch), "max_abs_z": worst}, {"within_3_std_errors": worst <= 3.0}


def _probes_for(cfg):
    return lambda spec: probe_points(spec, cfg["probes"], cfg["v_max"], derive_key(cfg["seed"], "probes"),
                                     d=spec.dim)


def _sweep(cfg, mu):
    eps = None if cfg["epsilon"] == "auto" else cfg["epsilon"]
    if eps is None:
        eps = lambda delta: calibrated_epsilon(delta, cfg["v_max"])  # noqa: E731
    res = sweep_contraction(mu, _probes_for(cfg), cfg["samples"], derive_key(cfg["seed"], "sweep"),
                            epsilon=eps, deltas=cfg["delta"], n0s=cfg["n0"], target=cfg["target"],
                            config=_walk_config(cfg))
    if not res.found:
        raise NoContraction("no (delta, n0) in the sweep met the contraction target")
    return res


def _sweep_summary(res):
    f = res.fit
    return {
        "delta": f.spec.delta, "n0": f.spec.n0, "epsilon": f.spec.epsilon,
        "alpha": f.alpha, "beta": f.beta, "tail_ratio": f.tail_ratio,
        "tried": [list(t) for t in res.tried],
    }


def run_lyapunov(cfg):
    mu = build_measure(cfg)
    res = _sweep(cfg, mu)
    spec = res.fit.fitted_spec()
    results = _sweep_summary(res)
    columns = ["point", "V", "estimate", "std_error", "bound", "holds"]
    rows = []
    checks = {"alpha_meets_target": res.fit.alpha <= cfg["target"]}
    if cfg["check_fresh"]:
        fresh = probe_points(spec, cfg["probes"], cfg["v_max"], derive_key(cfg["seed"], "fresh"), d=mu.dim)
        seed = derive_key(cfg["seed"], "fresh-drift")
        ok = drift_holds(mu, spec, fresh, cfg["samples"], seed, _walk_config(cfg))
        for i, x in enumerate(fresh):
            m, se = estimate_drift(mu, spec, x, cfg["samples"], derive_key(seed, "check", i), _walk_config(cfg))
            v = evaluate_V(spec, x)
            rows.append([i, v, m, se, spec.alpha * v + spec.beta + 3 * se, bool(ok[i])])
        results["fresh_fraction"] = float(ok.mean())
        checks["fresh_fraction_at_least_0.95"] = bool(ok.mean() >= 0.95)
    return columns, rows, results, checks


def run_recurrence(cfg):
    mu = build_measure(cfg)
    res = _sweep(cfg, mu)
    spec = res.fit.fitted_spec()
    n_list = cfg["n_list"] or [1, 2, 4, 8, 16]
    rr = recurrence_experiment(mu, spec, cfg["phi"], cfg["tol"], n_list, cfg["samples"],
                               derive_key(cfg["seed"], "recurrence"),
                               points_per_level=cfg["points_per_level"], d=mu.dim,
                               config=_walk_config(cfg))
    columns = ["n", "point", "start_V", "escape", "escape_se", "cesaro_escape", "cesaro_se", "bound"]
    rows = [[r.n, r.point, r.start_V, r.escape, r.escape_se, r.cesaro_escape, r.cesaro_se, r.bound]
            for r in rr.rows]
    late = [r for r in rr.rows if r.n >= spec.n0]
    results = _sweep_summary(res)
    results.update({"B": spec.B, "threshold": rr.threshold, "n0_pointwise": rr.n0_pointwise,
                    "n0_cesaro": rr.n0_cesaro, "rows_checked": len(late),
                    "max_cesaro_escape": max((r.cesaro_escape for r in late), default=None),
                    "max_escape": max((r.escape for r in late), default=None)})
    checks = {
        "cesaro_escape_within_tol": bool(late) and all(r.cesaro_escape <= cfg["tol"] + 3 * r.cesaro_se for r in late),
        "escape_within_bound": bool(late) and all(r.escape <= r.bound + 3 * r.escape_se for r in late),
    }
    return columns, rows, results, checks


def run_equidist(cfg):
    if cfg["mode"] == "haar":
        sampler = HaarSampler2D(cfg["seed"])
        columns = ["radius", "haar_expectation", "empirical", "std_error", "z", "relative_error"]
        rows, ok = [], True
        for r in cfg["radii"]:
            obs = SiegelObservable(r, 2, cfg["profile"])
            ref = haar_expectation(obs)
            m, se = haar_mean(obs, sampler, cfg["haar_draws"])
            z = (m - ref) / se if se > 0 else 0.0
            rel = abs(m - ref) / ref if ref else abs(m)
            ok &= abs(z) <= 3 and rel <= 0.01
            rows.append([r, ref, m, se, z, rel])
        return columns, rows, {"draws": cfg["haar_draws"]}, {"oracle_agreement": bool(ok)}
    if cfg["mode"] != "walk":
        raise ConfigError(f"unknown equidist mode {cfg['mode']!r}")
    mu = build_measure(cfg)
    obs = SiegelObservable(cfg["radius"], mu.dim, cfg["profile"])
    rep = equidistribution_report(mu, start_point(cfg, mu.dim), obs, cfg["n_max"], cfg["samples"],
                                  cfg["seed"], config=_walk_config(cfg))
    s = rep.series
    columns = ["n", "discrepancy", "std_error", "noise_floor"]
    rows = [[int(n), float(d), float(se), rep.noise_floor] for n, d, se in zip(s.n_values, s.estimates, s.std_errors)]
    fit = rep.fit
    results = {"haar_expectation": s.reference, "first_below_floor": rep.first_below,
               "slope": fit.slope, "fit_points": fit.n_points, "noise_dominated": fit.noise_dominated}
    checks = {"falls_below_floor": rep.first_below is not None,
              "negative_slope": bool(fit.slope < 0)}
    return columns, rows, results, checks


def run_uniform_cesaro(cfg):
    mu = build_measure(cfg)
    eps = cfg["epsilon"]
    if eps == "auto":
        eps = 1.0
    spec = LyapunovSpec(epsilon=eps, delta=cfg["delta"][0], dim=mu.dim)
    obs = SiegelObservable(cfg["radius"], mu.dim, cfg["profile"])
    n_list = cfg["n_list"] or [10, 100]
    tab = uniform_cesaro_experiment(mu, spec, cfg["phi"], obs, n_list, cfg["points_per_level"],
                                    cfg["samples"], cfg["seed"], _walk_config(cfg))
    columns = ["n", "level", "point", "start_V", "discrepancy", "std_error"]
    rows = [[r.n, r.level, r.point, r.start_V, r.discrepancy, r.std_error] for r in tab.rows]
    sup = tab.sup_by_n()
    ns = sorted(sup)
    first, last = sup[ns[0]], sup[ns[-1]]
    gap = first[0] - last[0]
    combined = math.hypot(first[1], last[1])
    results = {"haar_expectation": tab.reference,
               "sup": {str(n): {"value": v, "std_error": e} for n, (v, e) in sup.items()},
               "gap": gap, "combined_std_error": combined}
    return columns, rows, results, {"sup_decreases": bool(gap > 3 * combined)}


RUNNERS = {
    "chain": run_chain,
    "walk": run_walk,
    "lyapunov": run_lyapunov,
    "recurrence": run_recurrence,
    "equidist": run_equidist,
    "uniform-cesaro": run_uniform_cesaro,
}


# ---------------------------------------------------------------------------
# output


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _versions():
    import scipy
    import sympy
    try:
        from importlib.metadata import version
        pkg = version("artifact")
    except Exception:
        pkg = "unknown"
    return {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__,
            "sympy": sympy.__version__, "package": pkg}


def _jsonable(v):
    if isinstance(v, GrowthProfile):
        return f"{v.kind}:{v.param!r}"
    if isinstance(v, Fraction):
        return _frac(v)
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def run(kind: str, cfg: dict, out: Path, preset: str | None = None) -> dict:
    columns, rows, results, checks = RUNNERS[kind](cfg)
    out.mkdir(parents=True, exist_ok=True)
    (out / "data.csv").write_text(csv_text(columns, rows))
    meta = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "preset": preset,
        "seed": cfg["seed"],
        "config": {k: _jsonable(v) for k, v in cfg.items()},
        "layout": {"chunk_size": cfg["chunk_size"], "threads": cfg["threads"]},
        "versions": _versions(),
        "columns": columns,
        "results": results,
        "checks": checks,
    }
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return meta


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="latwalk", description="Random walks on spaces of lattices: experiments.")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--config", type=Path, help="flat key = value file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, default=Path("latwalk-out"))
    p.add_argument("--threads", type=int)
    p.add_argument("--preset", help="experiment preset (criterion-1 .. criterion-9) or generator preset")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = read_config_text(args.config.read_text()) if args.config else {}
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if args.threads is not None and args.threads < 1:
            raise ConfigError("threads must be >= 1")
        cfg = resolve(args.kind, args.preset, raw, {"seed": args.seed, "threads": args.threads})
        meta = run(args.kind, cfg, args.out, args.preset)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (EnumerationBudgetExceeded, SingularBasisError, NoContraction, fc.OrbitTooLarge,
            np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    for name, ok in meta["checks"].items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"wrote {args.out / 'data.csv'} and {args.out / 'metadata.json'}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
