"""Command-line interface: ``cubiperc {sample,sweep,measure,tails,fixtures,check}``.

Exit codes:
    0  success
    1  runtime failure, or a failing check in ``check``
    2  invalid flags or configuration (including infeasible fixtures)

Sweep flags mirror :class:`SweepConfig`.  ``--config FILE`` loads a JSON
object with the same field names; flags given on the command line override
it, and the ``CUBIPERC_SEED`` environment variable overrides both.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .clusters import component_table, components_to_json, format_key, summaries_from_table
from .errors import CapacityError, CubipercError, DomainError, FitError
from .experiments import (
    SweepConfig,
    default_threads,
    export,
    load_bundle,
    p_mesh,
    run_sweep,
    tail_fits,
)
from .gridio import load_grid, save_grid
from .lattice import WindowSpec, derive_seed, sample_window
from .measures import COUNTING_RULES, empirical_measure

log = logging.getLogger("cubiperc")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2
SEED_ENV = "CUBIPERC_SEED"


class ConfigError(Exception):
    """Bad flags or configuration; maps to exit status 2."""


def parse_p_list(text: str) -> list[float]:
    """``0.25,0.4`` (list) or ``0.25:0.85:0.15`` (inclusive start:stop:step)."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            values = p_mesh(start, stop, step)
        else:
            values = [float(x) for x in text.split(",") if x.strip()]
    except (ValueError, DomainError) as exc:
        raise ConfigError(f"cannot parse probability list {text!r}: {exc}") from exc
    for p in values:
        if not 0.0 <= p <= 1.0:
            raise ConfigError(f"probability {p} lies outside [0, 1]")
    return values


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse integer list {text!r}") from exc


def _flag_type(parse):
    """Adapt a parser for argparse, which reports ArgumentTypeError with exit 2."""

    def wrapped(text):
        try:
            return parse(text)
        except ConfigError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc

    wrapped.__name__ = parse.__name__
    return wrapped


def _env_seed() -> int | None:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV}={raw!r} is not an integer") from exc


def _seed(flag: int | None, fallback: int = 0) -> int:
    env = _env_seed()
    if env is not None:
        return env
    return fallback if flag is None else flag


# Sweep flags, mapped one-to-one onto SweepConfig fields.
SWEEP_FLAGS = {
    "d": "d", "L": "L", "p": "p", "iterates": "iterates", "seed": "seed",
    "mode": "mode", "counting": "counting", "k_max": "k_max", "n_max": "n_max",
    "coupling": "coupling", "threads": "threads", "out_csv": "out_csv", "out_json": "out_json",
}


def add_sweep_flags(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--config", help="JSON file with SweepConfig fields; flags override it")
    ap.add_argument("--d", type=int, help="lattice dimension, 2..4 (default 2)")
    ap.add_argument("--L", type=_flag_type(parse_int_list), help="window sides, comma list (default 250)")
    ap.add_argument("--p", "--p-mesh", dest="p", type=_flag_type(parse_p_list),
                    help="probabilities: comma list or start:stop:step (default 0.25,...,0.85)")
    ap.add_argument("--iterates", "--iters", dest="iterates", type=int,
                    help="samples per (L, p) (default 20)")
    ap.add_argument("--seed", type=int, help=f"master seed (default 0; {SEED_ENV} overrides)")
    ap.add_argument("--mode", choices=["open", "closed"], help="cluster complex (default closed)")
    ap.add_argument("--counting", choices=list(COUNTING_RULES),
                    help="N: interior clusters only; Nstar: every cluster meeting the window (default N)")
    ap.add_argument("--k-max", dest="k_max", type=int, help="largest planar key reported (default 10)")
    ap.add_argument("--n-max", dest="n_max", type=int, help="largest tail index (default 20)")
    ap.add_argument("--coupling", action="store_true", default=None,
                    help="threshold one uniform field per (L, iterate) at every p")
    ap.add_argument("--threads", type=int, help="worker processes (default: CPU count)")
    ap.add_argument("--out", "--out-csv", dest="out_csv", help="CSV output path (default stdout)")
    ap.add_argument("--json", "--out-json", dest="out_json", help="also write the JSON bundle here")


def config_from_args(args) -> SweepConfig:
    base: dict = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(base, dict):
            raise ConfigError("config file must hold a JSON object")
    for flag, name in SWEEP_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            base[name] = value
    env = _env_seed()
    if env is not None:
        base["seed"] = env
    base.setdefault("threads", default_threads())
    try:
        cfg = SweepConfig.from_dict(base)
        if isinstance(cfg.p, str):
            cfg.p = parse_p_list(cfg.p)
        return cfg.validate()
    except (CubipercError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _summary_table(result) -> str:
    lines = [f"{'L':>5} {'p':>6} {'key':>6} {'count':>8} {'a':>10} {'100c':>10}"]
    for cell in result.cells:
        totals = cell.total_counts()
        for key in result.keys()[:4]:
            a, _ = cell.a(key)
            c, _ = cell.c100(key)
            lines.append(
                f"{cell.L:>5} {cell.p:>6.3g} {format_key(key):>6} {totals.get(key, 0):>8} {a:>10.4g} {c:>10.4g}"
            )
    return "\n".join(lines)


def cmd_sweep(args) -> int:
    cfg = config_from_args(args)
    result = run_sweep(cfg)
    text = export(result, "csv", cfg.out_csv)
    if cfg.out_csv is None:
        sys.stdout.write(text)
    if cfg.out_json:
        export(result, "json", cfg.out_json)
    print(_summary_table(result), file=sys.stderr)
    failures = result.failures()
    if failures:
        for L, p, err in failures:
            print(f"error: L={L} p={p:g}: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_tails(args) -> int:
    if args.bundle:
        result = load_bundle(args.bundle)
        n_max = args.n_max or result.config.n_max
        result.config.n_max = n_max
    else:
        cfg = config_from_args(args)
        result = run_sweep(cfg)
        n_max = cfg.n_max
    text = export(result, "tails-csv", args.out_csv)
    if args.out_csv is None:
        sys.stdout.write(text)
    fit_range = tuple(args.fit_range) if args.fit_range else None
    for cell in result.cells:
        for k in range(1, result.config.d):
            fits = tail_fits(cell, k, n_max, fit_range, args.weighted)
            for model, fit in fits.items():
                if isinstance(fit, FitError):
                    msg = f"fit failed: {fit}"
                else:
                    msg = (
                        f"rate={fit.rate:.4g} se={fit.rate_stderr:.3g} R2={fit.r2:.4f} "
                        f"n={fit.fit_range[0]}..{fit.fit_range[1]} points={fit.n_points}"
                    )
                print(f"L={cell.L} p={cell.p:g} k={k} {model:<11} {msg}", file=sys.stderr)
    return EXIT_OK


def _grid_from_args(args):
    if args.grid:
        return load_grid(args.grid)
    if args.d is None or args.L is None or args.p is None:
        raise ConfigError("give --grid FILE, or all of --d, --L and --p")
    if not 0.0 <= args.p <= 1.0:
        raise ConfigError(f"probability {args.p} lies outside [0, 1]")
    seed = _seed(args.seed)
    return sample_window(WindowSpec.centered(args.d, args.L), args.p, derive_seed(seed, args.d, args.L))


def cmd_sample(args) -> int:
    grid = _grid_from_args(args)
    if args.out:
        save_grid(grid, args.out)
    info = {
        "d": grid.d, "dims": list(grid.dims), "origin": list(grid.origin),
        "p": grid.p, "seed": grid.seed, "black": grid.black_count,
    }
    print(json.dumps(info))
    return EXIT_OK


def cmd_measure(args) -> int:
    grid = _grid_from_args(args)
    if len(set(grid.dims)) != 1:
        raise ConfigError("measures need a cubic window grid")
    L = grid.dims[0]
    window = WindowSpec(tuple(o + L // 2 for o in grid.origin), L)
    table = component_table(grid, args.mode)
    summaries = summaries_from_table(table)
    m = empirical_measure(summaries, window, grid.p, args.mode, args.counting, allow_undefined=True)
    print("key,count,a,c")
    for key in m.support():
        print(f"{format_key(key)},{m.count(key)},{m.a(key):.6g},{m.c(key):.6g}")
    if not m.defined:
        print("warning: no clusters qualify; the measure is undefined", file=sys.stderr)
    if args.components:
        Path(args.components).write_text(components_to_json(summaries) + "\n")
    return EXIT_OK


def cmd_fixtures(args) -> int:
    from .generators import make_egg, make_egg_sac, sac_component_betti, verify_egg

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        if args.kind == "egg":
            patch = make_egg(args.d, args.k)
            grid = patch.grid
            rep = verify_egg(patch)
            report = {
                "kind": "egg", "d": args.d, "k": args.k, "verify": rep.ok,
                "core_betti": list(rep.core_betti),
            }
            ok = rep.ok
        else:
            if args.L is None or args.m is None:
                raise ConfigError("sac fixtures need --L and --m")
            grid, spec = make_egg_sac(args.L, args.d, args.k, args.m)
            betti = sac_component_betti(grid, args.mode)
            report = {
                "kind": "sac", "d": args.d, "k": args.k, "L": args.L, "m": spec.m,
                "rho": spec.rho, "egg_anchors": [list(a) for a in spec.egg_anchors],
                "betti": list(betti), "betti_k": betti[args.k],
                "witness": betti[args.k] >= spec.m,
            }
            ok = report["witness"]
    except CapacityError as exc:
        raise ConfigError(f"{exc} (maximal feasible m = {exc.max_feasible})") from exc
    except (DomainError, NotImplementedError) as exc:
        raise ConfigError(str(exc)) from exc
    stem = f"{args.kind}_d{args.d}_k{args.k}" + (f"_L{args.L}_m{args.m}" if args.kind == "sac" else "")
    suffix = ".json" if args.format == "json" else ".cpg"
    grid_path = out_dir / (stem + suffix)
    save_grid(grid, grid_path)
    report["grid"] = str(grid_path)
    (out_dir / (stem + "_report.json")).write_text(json.dumps(report, indent=1) + "\n")
    print(json.dumps(report))
    return EXIT_OK if ok else EXIT_RUNTIME


def cmd_check(args) -> int:
    from .selfcheck import run_battery

    seed = _seed(args.seed)
    results = run_battery(seed=seed, samples=args.samples)
    failed = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        failed += not ok
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cubiperc",
        description="Homotopy types of clusters in Bernoulli site percolation on Z^d.",
        epilog="exit codes: 0 ok, 1 runtime or check failure, 2 bad flags or config",
    )
    ap.add_argument("--version", action="version", version=f"cubiperc {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def grid_source(p):
        p.add_argument("--grid", help="read the grid from this file instead of sampling")
        p.add_argument("--d", type=int, help="dimension of a sampled grid")
        p.add_argument("--L", type=int, help="window side of a sampled grid")
        p.add_argument("--p", type=float, help="coloring probability of a sampled grid")
        p.add_argument("--seed", type=int, help=f"master seed (default 0; {SEED_ENV} overrides)")

    p = sub.add_parser("sample", help="draw one colored window and optionally save it")
    grid_source(p)
    p.add_argument("--out", help="grid file (.json for JSON, anything else binary)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("sweep", help="Monte-Carlo sweep over window sides and probabilities")
    add_sweep_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("measure", help="homotopy-type measure of one grid")
    grid_source(p)
    p.add_argument("--mode", choices=["open", "closed"], default="closed", help="cluster complex")
    p.add_argument("--counting", choices=list(COUNTING_RULES), default="N", help="counting rule")
    p.add_argument("--components", help="write per-cluster summaries as JSON here")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("tails", help="tail masses and decay fits")
    add_sweep_flags(p)
    p.add_argument("--bundle", help="read a sweep JSON bundle instead of running a sweep")
    p.add_argument("--fit-range", nargs=2, type=int, metavar=("LO", "HI"),
                   help="tail indices used by the fits (default: all with nonzero mass)")
    p.add_argument("--weighted", action="store_true",
                   help="weight each tail point by its cluster count")
    p.set_defaults(func=cmd_tails)

    p = sub.add_parser("fixtures", help="write egg or egg-sac fixture grids with a report")
    p.add_argument("kind", choices=["egg", "sac"])
    p.add_argument("--d", type=int, default=2, help="dimension (default 2)")
    p.add_argument("--k", type=int, default=1, help="cycle dimension (default 1)")
    p.add_argument("--L", type=int, help="sac side")
    p.add_argument("--m", type=int, help="number of eggs in the sac")
    p.add_argument("--mode", choices=["open", "closed"], default="open", help="complex for the report")
    p.add_argument("--format", choices=["binary", "json"], default="json", help="grid file format")
    p.add_argument("--out-dir", default=".", help="output directory (default .)")
    p.set_defaults(func=cmd_fixtures)

    p = sub.add_parser("check", help="run the self-test battery")
    p.add_argument("--seed", type=int, help=f"master seed (default 0; {SEED_ENV} overrides)")
    p.add_argument("--samples", type=int, default=20, help="random samples per randomized check")
    p.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"cubiperc: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CubipercError, OSError, ValueError) as exc:
        print(f"cubiperc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
