"""Command-line front end.

    learnrate spectrum --n 100 --beta 0 --trials 10 --seed 42
    learnrate learn --n 50 --delta 0.01 --method both --sim --trials 10000
    learnrate harmonic --beta 0 --n-grid 100 1000 10000 --trials 2000
    learnrate stable --alpha 0.5 --size 100000
    learnrate scaling --beta -0.5 --method memoryless --summary fit.json

Flags override values from ``--config FILE`` (JSON), which override the
built-in defaults.  The effective config is written into every output.
Per-instance and per-trial seeds are derived from ``--seed`` with
``learnrate.distributions.mix_seed``.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

from . import harmonic_limits as hl
from . import learners
from .distributions import (instance_from_overlaps, make_distribution, make_instance)
from .experiments import DEFAULT_GRID, METHODS, MODELS, fit_scaling, instance_seed, scaling_sweep
from .output import render
from .spectral import summarize

SPECTRUM_COLUMNS = ["n", "seed", "lambda_star", "mu_star", "H", "C", "bound_lo_ok", "bound_hi_ok"]
LEARN_COLUMNS = ["instance", "seed", "method", "n", "delta", "N_delta", "prediction",
                 "trials", "ci_halfwidth"]
STAT_COLUMNS = ["n", "beta", "trials", "statistic_name", "estimate", "stderr"]
SCALING_COLUMNS = ["n", "beta", "delta", "method", "N_delta_estimate", "estimator", "stderr",
                   "q25", "q75", "instances", "seed"]

COMMON_DEFAULTS = {
    "family": "powergap", "beta": 0.0, "gaps": None, "seed": 0, "format": "csv",
    "output": None, "jobs": 1,
}
DEFAULTS = {
    "spectrum": {"n": 100, "trials": 10, "skip_c": False},
    "learn": {"n": 100, "delta": 0.01, "method": "both", "trials": 10000, "mode": "exact",
              "instances": 1, "overlaps": None},
    "harmonic": {"n_grid": [100, 1000, 10000], "trials": 2000, "a_tol": 0.1, "ks": False,
                 "dump": None},
    "stable": {"alpha": 0.5, "size": 100000, "dump": None},
    "scaling": {"n_grid": list(DEFAULT_GRID), "trials": 30, "delta": 0.01, "method": "memoryless",
                "model": None, "summary": None},
}


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with default values for any flag")
    p.add_argument("--family", choices=["uniform", "powergap", "empirical"])
    p.add_argument("--beta", type=float, help="gap-density exponent near 0 (> -1)")
    p.add_argument("--gaps", type=float, nargs="+", help="gap values for --family empirical")
    p.add_argument("--seed", type=int, help="64-bit base seed")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.add_argument("--jobs", type=int, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="learnrate", description=__doc__.split("\n")[0],
                                     argument_default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("spectrum", help="lambda*, mu*, H, C per random instance",
                       argument_default=argparse.SUPPRESS)
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int, help="number of instances")
    p.add_argument("--skip-c", dest="skip_c", action="store_true", help="skip the O(n^3) C computation")

    p = sub.add_parser("learn", help="N_Delta for the two learners", argument_default=argparse.SUPPRESS)
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--method", choices=["memoryless", "fullmem", "both"])
    p.add_argument("--trials", type=int, help="simulation trials")
    p.add_argument("--instances", type=int)
    p.add_argument("--overlaps", type=float, nargs="+",
                   help="fixed overlaps a_2..a_n (overrides sampling)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="mode", action="store_const", const="exact")
    mode.add_argument("--sim", dest="mode", action="store_const", const="sim")

    p = sub.add_parser("harmonic", help="harmonic-mean limit statistics",
                       argument_default=argparse.SUPPRESS)
    _common(p)
    p.add_argument("--n-grid", dest="n_grid", type=int, nargs="+")
    p.add_argument("--trials", type=int)
    p.add_argument("--a-tol", dest="a_tol", type=float, help="band for the law-of-large-numbers check")
    p.add_argument("--ks", action="store_true", help="add n vs 4n two-sample KS rows")
    p.add_argument("--dump", help="write raw per-trial X, H, Y samples to this CSV")

    p = sub.add_parser("stable", help="one-sided stable reference sampler",
                       argument_default=argparse.SUPPRESS)
    _common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--size", type=int)
    p.add_argument("--dump", help="write raw samples to this CSV")

    p = sub.add_parser("scaling", help="N_Delta sweep over n", argument_default=argparse.SUPPRESS)
    _common(p)
    p.add_argument("--n-grid", dest="n_grid", type=int, nargs="+")
    p.add_argument("--trials", type=int, help="instances per grid point")
    p.add_argument("--delta", type=float)
    p.add_argument("--method", choices=list(METHODS))
    p.add_argument("--model", choices=list(MODELS), help="scaling model for the summary")
    p.add_argument("--summary", help="JSON file for the fitted slope and ratio spread")
    return parser


def effective_config(args: argparse.Namespace) -> dict:
    given = vars(args).copy()
    cfg = {"subcommand": given.pop("subcommand"), **COMMON_DEFAULTS, **DEFAULTS[args.subcommand]}
    path = given.pop("config", None)
    if path:
        with open(path) as fh:
            from_file = json.load(fh)
        unknown = set(from_file) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(from_file)
    cfg.update(given)
    if cfg["seed"] < 0 or cfg["seed"] >= 2**64:
        raise UsageError("--seed must be a 64-bit unsigned integer")
    if cfg["jobs"] < 1:
        raise UsageError("--jobs must be >= 1")
    return cfg


def _dist(cfg):
    return make_distribution(cfg["family"], cfg["beta"], gaps=cfg["gaps"])


def _spectrum_row(dist, n, seed, skip_c, j):
    s = instance_seed(seed, n, j)
    summ = summarize(make_instance(dist, n, s), with_C=not skip_c)
    return {"n": n, "seed": s, "lambda_star": summ.lambda_star, "mu_star": summ.mu_star,
            "H": summ.H, "C": summ.C, "bound_lo_ok": summ.bound_lo_ok,
            "bound_hi_ok": summ.bound_hi_ok}


def _map(fn, items, jobs):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def cmd_spectrum(cfg):
    if cfg["n"] < 2 or cfg["trials"] < 1:
        raise UsageError("--n must be >= 2 and --trials >= 1")
    fn = partial(_spectrum_row, _dist(cfg), cfg["n"], cfg["seed"], cfg["skip_c"])
    return _map(fn, range(cfg["trials"]), cfg["jobs"]), SPECTRUM_COLUMNS


def cmd_learn(cfg):
    delta = cfg["delta"]
    if not 0 < delta < 1:
        raise UsageError("--delta must lie in (0, 1)")
    rows = []
    for j in range(cfg["instances"]):
        if cfg["overlaps"] is not None:
            inst, s = instance_from_overlaps([1.0, *cfg["overlaps"]]), None
        else:
            s = instance_seed(cfg["seed"], cfg["n"], j)
            inst = make_instance(_dist(cfg), cfg["n"], s)
        outs = []
        sim_seed = cfg["seed"] if s is None else s
        if cfg["method"] in ("memoryless", "both"):
            outs.append(learners.n_delta_memoryless(inst, delta) if cfg["mode"] == "exact" else
                        learners.n_delta_memoryless_sim(inst, delta, cfg["trials"], sim_seed))
        if cfg["method"] in ("fullmem", "both"):
            outs.append(learners.n_delta_full_memory_exact(inst, delta) if cfg["mode"] == "exact" else
                        learners.n_delta_full_memory_sim(inst, delta, cfg["trials"], sim_seed))
        for o in outs:
            rows.append({"instance": j, "seed": s, "method": o.method.value, "n": o.n,
                         "delta": o.delta, "N_delta": o.N_delta, "prediction": o.prediction,
                         "trials": o.trials, "ci_halfwidth": o.ci_halfwidth})
    return rows, LEARN_COLUMNS


def _stat(n, beta, trials, name, est, se=None):
    return {"n": n, "beta": beta, "trials": trials, "statistic_name": name,
            "estimate": float(est), "stderr": None if se is None else float(se)}


def cmd_harmonic(cfg):
    dist = _dist(cfg)
    trials, seed = cfg["trials"], cfg["seed"]
    rows, dumps = [], []
    for n in cfg["n_grid"]:
        s = hl.sample_limit(dist, n, trials, seed)
        rows.append(_stat(n, dist.beta, trials, "mean_X", s.X.mean(), s.X.std(ddof=1) / math.sqrt(trials)))
        rows.append(_stat(n, dist.beta, trials, "mean_Y", s.Y.mean(), s.Y.std(ddof=1) / math.sqrt(trials)))
        v = hl.regime_constant_statistic(s.H, n, dist)
        rows.append(_stat(n, dist.beta, trials, "regime_constant", v.mean(), v.std(ddof=1) / math.sqrt(trials)))
        if dist.beta >= 0:
            frac = float(np.mean(hl.lln_deviation(s.H, n, dist) > cfg["a_tol"]))
            rows.append(_stat(n, dist.beta, trials, "lln_violation", frac,
                              math.sqrt(frac * (1 - frac) / trials)))
        if cfg["ks"]:
            sc = hl.limit_law_selfconsistency(dist, n, trials, seed)
            rows.append(_stat(n, dist.beta, trials, "ks_n_vs_4n", sc.ks))
            rows.append(_stat(n, dist.beta, trials, "ks_critical_1pct", sc.critical_1pct))
            rows.append(_stat(n, dist.beta, trials, "transform_identity_gap", sc.transform_gap))
        if cfg["dump"]:
            dumps.extend({"n": n, "trial": t, "X": float(s.X[t]), "H": float(s.H[t]), "Y": float(s.Y[t])}
                         for t in range(trials))
    if cfg["dump"]:
        _write(cfg["dump"], render(dumps, cfg, "csv", ["n", "trial", "X", "H", "Y"]))
    return rows, STAT_COLUMNS


def cmd_stable(cfg):
    alpha, size = cfg["alpha"], cfg["size"]
    x = hl.sample_one_sided_stable(alpha, size, cfg["seed"])
    beta = alpha - 1.0
    rows = [_stat(size, beta, size, "median", np.median(x)),
            _stat(size, beta, size, "hill_tail_exponent", hl.hill_estimator(x))]
    if alpha == 0.5:
        from scipy import stats
        rows.append(_stat(size, beta, size, "ks_vs_levy", stats.kstest(x, hl.levy_cdf).statistic))
    if cfg["dump"]:
        _write(cfg["dump"], render([{"index": i, "value": float(v)} for i, v in enumerate(x)],
                                   cfg, "csv", ["index", "value"]))
    return rows, STAT_COLUMNS


def cmd_scaling(cfg):
    dist = _dist(cfg)
    table = scaling_sweep(dist, cfg["delta"], cfg["n_grid"], cfg["trials"], cfg["method"],
                          cfg["seed"], cfg["jobs"])
    if cfg["summary"]:
        model = cfg["model"] or ("n_log_n" if dist.beta == 0 else "linear_n" if dist.beta > 0
                                 else "power_law")
        fit = fit_scaling(table, model) if len(table.rows) >= 4 else None
        summary = {"schema_version": 1, "config": cfg, "calibrated": True, "model": model}
        if fit is not None:
            summary.update(slope=fit.slope, intercept=fit.intercept, r2=fit.r2,
                           ratio_spread=fit.ratio_spread, ratios=fit.ratios.tolist(),
                           target_slope=1.0 / (1.0 + dist.beta) if dist.beta < 0 else 1.0)
        _write(cfg["summary"], json.dumps(summary, indent=2) + "\n")
    return table.to_dicts(), SCALING_COLUMNS


COMMANDS = {"spectrum": cmd_spectrum, "learn": cmd_learn, "harmonic": cmd_harmonic,
            "stable": cmd_stable, "scaling": cmd_scaling}


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def run(cfg: dict) -> str:
    """Execute a fully resolved config and return the rendered output."""
    rows, columns = COMMANDS[cfg["subcommand"]](cfg)
    return render(rows, cfg, cfg["format"], columns)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = effective_config(args)
        text = run(cfg)
    except (UsageError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"learnrate {args.subcommand}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"learnrate: I/O error: {exc}", file=sys.stderr)
        return 1
    try:
        _write(cfg["output"], text)
    except OSError as exc:
        print(f"learnrate: I/O error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
