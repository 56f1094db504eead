"""Batch command-line front end.

Every subcommand writes its outputs into ``--out`` together with
``manifest.json`` (config echo, versions, timings).  Data files carry the
config hash and are byte-identical across repeated runs; the manifest is
not, since it records wall-clock timings.

Exit status: 0 on success, 1 when a check fails (``mean-law``,
``conjugacy-check``, or any command run with ``--require-pass``), 2 on a
configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from .certify import approximate_K, certify, default_a_grid, find_a0
from .io import config_hash, dumps, write_csv, write_json
from .maps import (
    ConjugateMap,
    MapParams,
    ReplicatorMap,
    conjugacy_residual,
    inv_logit,
    symmetry_residual,
)
from .orbits import birkhoff_average, lyapunov_exponent, write_orbit_csv
from .periodic import bifurcation_scan, find_periodic, periodic_search, verify_mean_law
from .shiftlab import (
    FunctionBasis,
    coboundary_lsq,
    measure_rank_probe,
    orbit_measure,
    residual_curve,
)
from .symbolic import counts, enumerate_periodic, least_period_orbit_counts

NON_CONFIG = {"out", "jobs", "config", "func"}


class ConfigError(Exception):
    pass


def parse_real(text) -> float:
    """Decimal or exact fraction such as ``1/3``."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    try:
        return float(Fraction(str(text).strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def _params(args) -> MapParams:
    try:
        return MapParams(args.a, args.b)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _path(args, name):
    return os.path.join(args.out, name)


# -- subcommands ---------------------------------------------------------------

def cmd_orbit(args, h):
    P = _params(args)
    T = ReplicatorMap(P) if args.map == "f" else ConjugateMap(P)
    if args.map == "f" and not 0.0 <= args.x0 <= 1.0:
        raise ConfigError("x0 must lie in [0, 1] for the map f")
    pts = T.orbit(args.x0, args.n)
    center = P.b if args.map == "f" else P.y0
    write_orbit_csv(_path(args, "orbit.csv"), pts, pts[:-1] - center, h)
    summary = {"map": args.map, "a": P.a, "b": P.b, "x0": args.x0, "n": args.n,
               "mean": float(np.mean(pts[:-1])) if args.n else float(pts[0])}
    if args.n >= 1:
        ly = lyapunov_exponent(T, args.x0, args.n, burn_in=args.burn_in)
        summary["lyapunov"] = ly.exponent
        summary["degenerate_hits"] = ly.degenerate_hits
        summary["birkhoff_average"] = birkhoff_average(T, lambda x: x, args.x0, args.n, args.burn_in)
    write_json(_path(args, "orbit_summary.json"), summary, h)
    return 0, ["orbit.csv", "orbit_summary.json"]


def cmd_periodic(args, h):
    P = _params(args)
    T = ReplicatorMap(P) if args.map == "f" else ConjugateMap(P)
    periods = [args.n] if args.n else list(range(1, args.max_period + 1))
    out = []
    for n in periods:
        res = periodic_search(T, n)
        out.append({"n": n, "solutions": int(len(res.solutions)),
                    "orbits": [o.as_dict() for o in res.orbits],
                    "tangencies": [vars(t) for t in res.tangencies]})
    write_json(_path(args, "periodic.json"), {"map": args.map, "a": P.a, "b": P.b, "periods": out}, h)
    return 0, ["periodic.json"]


def cmd_bifurcation(args, h):
    if not 0.0 < args.b < 1.0:
        raise ConfigError("b must lie in (0, 1)")
    if args.a_min <= 4.0 or args.a_max <= args.a_min:
        raise ConfigError("need 4 < a-min < a-max")
    tab = bifurcation_scan(args.b, (args.a_min, args.a_max), args.a_steps,
                           args.samples, args.burn_in, jobs=args.jobs)
    write_csv(_path(args, "bifurcation.csv"), ["a", "sample"], tab.rows(), h)
    write_json(_path(args, "bifurcation_periods.json"),
               {"b": args.b, "a": tab.a_values, "period": [p if p is not None else -1 for p in tab.periods],
                "first_1_to_2": tab.first_change(1, 2),
                "max_period": max([p for p in tab.periods if p is not None], default=None)}, h)
    return 0, ["bifurcation.csv", "bifurcation_periods.json"]


def cmd_certify(args, h):
    P = _params(args)
    if P.monotone:
        raise ConfigError("the certificate needs a > 4")
    cert = certify(P, args.depth, args.samples)
    write_json(_path(args, "certificate.json"), cert.as_dict(), h)
    files = ["certificate.json"]
    if cert.covering.get("all") and cert.ordering_ok:
        K = approximate_K(cert, args.depth)
        write_csv(_path(args, "k_approximation.csv"), ["label", "left", "right"], K.rows(), h)
        files.append("k_approximation.csv")
    status = 1 if (args.require_pass and not cert.passed) else 0
    return status, files


def cmd_find_a0(args, h):
    if not 0.0 < args.b < 1.0:
        raise ConfigError("b must lie in (0, 1)")
    grid = default_a_grid(args.a_min, args.a_max, args.factor)
    res = find_a0(args.b, grid, args.depth, jobs=args.jobs)
    write_json(_path(args, "find_a0.json"), res.as_dict(), h)
    status = 1 if (args.require_pass and res.threshold is None) else 0
    return status, ["find_a0.json"]


def cmd_symbolic(args, h):
    if args.max_n < 1:
        raise ConfigError("max-n must be at least 1")
    table = []
    for n in range(1, args.max_n + 1):
        c = counts(n)
        row = c.as_dict()
        row["least_period_orbits"] = least_period_orbit_counts(n)
        row["verified"] = c.verified
        table.append(row)
    write_json(_path(args, "counts.json"), {"table": table}, h)
    with open(_path(args, "words.txt"), "w") as fh:
        fh.write(f"# config_hash={h}\n")
        for n in range(1, min(args.max_n, args.words_max_n) + 1):
            words, _ = enumerate_periodic(n)
            for w in words:
                fh.write(w + "\n")
    return 0, ["counts.json", "words.txt"]


def cmd_shiftlab(args, h):
    P = _params(args)
    if P.monotone:
        raise ConfigError("the lab needs a > 4")
    f = ReplicatorMap(P)
    orbits = [o for n in range(1, args.max_period + 1) for o in find_periodic(P, n) if o.interior]
    g = ConjugateMap(P)
    y_max, y_min = g.critical_points()
    # absorbing interval [f_min, f_max] in x
    lo, hi = float(inv_logit(g(y_max))), float(inv_logit(g(y_min)))
    delta = args.delta * (hi - lo)
    grid = np.linspace(lo + delta, hi - delta, args.grid)
    samples = np.concatenate([grid] + [o.points for o in orbits])
    psi = lambda x: x - P.b
    basis = FunctionBasis.chebyshev(args.degree, (lo, hi), include_logit=True)
    fit = coboundary_lsq(f, psi, basis, samples)
    curve = residual_curve(f, psi, list(range(1, args.degree + 1)), samples, (lo, hi), include_logit=False)
    measures = [orbit_measure(o) for o in orbits]
    rank = measure_rank_probe(measures, FunctionBasis.monomial(args.degree)) if len(measures) > 1 else None
    centred = (measure_rank_probe(measures, FunctionBasis(["x"], [lambda x: x]), center=True)
               if len(measures) > 1 else None)
    write_json(_path(args, "shiftlab.json"), {
        "a": P.a, "b": P.b, "absorbing_interval": [lo, hi], "cycles": len(orbits),
        "fit": fit.as_dict(), "logit_coefficient_times_a": fit.coefficient("logit") * P.a,
        "rank": rank.as_dict() if rank else None,
        "centred_mean_rank": centred.rank if centred else None,
    }, h)
    write_csv(_path(args, "residual_curve.csv"), ["basis_size", "residual"], curve, h)
    return 0, ["shiftlab.json", "residual_curve.csv"]


def cmd_conjugacy(args, h):
    P = _params(args)
    grid = np.linspace(0.01, 0.99, args.grid)
    conj = conjugacy_residual(P, grid)
    sym = symmetry_residual(P, grid)
    ok = conj <= args.conj_tol and sym <= args.sym_tol
    write_json(_path(args, "conjugacy.json"), {"a": P.a, "b": P.b, "grid": args.grid,
                                               "conjugacy_residual": conj, "symmetry_residual": sym,
                                               "pass": ok}, h)
    return (0 if ok else 1), ["conjugacy.json"]


def cmd_mean_law(args, h):
    P = _params(args)
    orbits, per_n = [], []
    for n in range(1, args.max_period + 1):
        found = find_periodic(P, n)
        orbits += found
        per_n.append({"n": n, "orbits": len(found)})
    rep = verify_mean_law(orbits, P.b, args.tol)
    write_json(_path(args, "mean_law.json"), {"a": P.a, "b": P.b, "per_period": per_n,
                                              "max_residual": max((o.residual for o in orbits), default=0.0),
                                              **rep.as_dict()}, h)
    return (0 if rep.passed else 1), ["mean_law.json"]


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="replicator-lab", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command")

    def common(sp, ab=True):
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--config", help="JSON file with option values")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--require-pass", action="store_true")
        if ab:
            sp.add_argument("--a", type=parse_real, default=30.0)
            sp.add_argument("--b", type=parse_real, default=1.0 / 3.0)

    sp = sub.add_parser("orbit", help="iterate f or g and write k, x_k, S_k")
    common(sp)
    sp.add_argument("--map", choices=["f", "g"], default="f")
    sp.add_argument("--x0", type=parse_real, default=0.5)
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--burn-in", type=int, default=1000)
    sp.set_defaults(func=cmd_orbit)

    sp = sub.add_parser("periodic", help="periodic orbits of f or g")
    common(sp)
    sp.add_argument("--map", choices=["f", "g"], default="f")
    sp.add_argument("--n", type=int, default=0, help="single period (0: use --max-period)")
    sp.add_argument("--max-period", type=int, default=6)
    sp.set_defaults(func=cmd_periodic)

    sp = sub.add_parser("bifurcation", help="attractor samples over a range of a")
    common(sp, ab=False)
    sp.add_argument("--b", type=parse_real, default=1.0 / 3.0)
    sp.add_argument("--a-min", type=parse_real, default=4.1)
    sp.add_argument("--a-max", type=parse_real, default=40.0)
    sp.add_argument("--a-steps", type=int, default=400)
    sp.add_argument("--samples", type=int, default=64)
    sp.add_argument("--burn-in", type=int, default=2000)
    sp.set_defaults(func=cmd_bifurcation)

    sp = sub.add_parser("certify", help="hyperbolicity certificate")
    common(sp)
    sp.add_argument("--depth", type=int, default=10)
    sp.add_argument("--samples", type=int, default=1000)
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("find-a0", help="grid threshold of the certificate")
    common(sp, ab=False)
    sp.add_argument("--b", type=parse_real, default=1.0 / 3.0)
    sp.add_argument("--a-min", type=parse_real, default=4.1)
    sp.add_argument("--a-max", type=parse_real, default=200.0)
    sp.add_argument("--factor", type=parse_real, default=1.05)
    sp.add_argument("--depth", type=int, default=10)
    sp.set_defaults(func=cmd_find_a0)

    sp = sub.add_parser("symbolic", help="word counts of the golden-mean shift")
    common(sp, ab=False)
    sp.add_argument("--max-n", type=int, default=20)
    sp.add_argument("--words-max-n", type=int, default=12)
    sp.set_defaults(func=cmd_symbolic)

    sp = sub.add_parser("shiftlab", help="coboundary fit and measure rank probe")
    common(sp)
    sp.add_argument("--max-period", type=int, default=6)
    sp.add_argument("--degree", type=int, default=16)
    sp.add_argument("--grid", type=int, default=2000)
    sp.add_argument("--delta", type=parse_real, default=1e-3)
    sp.set_defaults(func=cmd_shiftlab)

    sp = sub.add_parser("conjugacy-check", help="conjugacy and symmetry residuals")
    common(sp)
    sp.add_argument("--grid", type=int, default=10_000)
    sp.add_argument("--conj-tol", type=parse_real, default=1e-10)
    sp.add_argument("--sym-tol", type=parse_real, default=1e-12)
    sp.set_defaults(func=cmd_conjugacy)

    sp = sub.add_parser("mean-law", help="orbit means of all periodic orbits")
    common(sp)
    sp.add_argument("--max-period", type=int, default=8)
    sp.add_argument("--tol", type=parse_real, default=1e-8)
    sp.set_defaults(func=cmd_mean_law)
    return p


def _load_config(argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return None
    try:
        with open(known.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {known.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    return cfg


def _parse(argv):
    parser = build_parser()
    cfg = _load_config(argv)
    if cfg is not None:
        cmd = cfg.pop("command", None)
        if cmd and not any(a in parser._subparsers._group_actions[0].choices for a in argv):
            argv = [cmd] + list(argv)
        choices = parser._subparsers._group_actions[0].choices
        name = next((a for a in argv if a in choices), None)
        if name is None:
            raise ConfigError("no command given")
        sp = choices[name]
        dests = {a.dest for a in sp._actions}
        unknown = set(k.replace("-", "_") for k in cfg) - dests
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        conv = {}
        for k, v in cfg.items():
            k = k.replace("-", "_")
            act = next(a for a in sp._actions if a.dest == k)
            conv[k] = act.type(v) if act.type and not isinstance(v, bool) else v
        sp.set_defaults(**conv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            raise
        raise ConfigError("invalid arguments") from exc
    if not args.command:
        parser.print_help(sys.stderr)
        raise ConfigError("no command given")
    return args


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    t0 = time.perf_counter()
    try:
        try:
            args = _parse(argv)
        except SystemExit:
            return 0
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        os.makedirs(args.out, exist_ok=True)
        config = {k: v for k, v in sorted(vars(args).items()) if k not in NON_CONFIG}
        h = config_hash(config)
        t1 = time.perf_counter()
        status, files = args.func(args, h)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    elapsed = time.perf_counter() - t1
    manifest = {
        "config": config,
        "outputs": files,
        "status": status,
        "versions": {"replicator_lab": __version__, "python": platform.python_version(),
                     "numpy": np.__version__},
        "timings": {"setup_s": t1 - t0, "run_s": elapsed},
    }
    write_json(os.path.join(args.out, "manifest.json"), manifest, h)
    print(dumps({"command": args.command, "status": status, "config_hash": h, "outputs": files}))
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
