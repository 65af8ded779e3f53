"""Command line entry point: ``qvote run | bounds | mov-check``.

Any ``run``/``bounds`` flag may also come from a ``key = value`` config file
passed with ``--config``; flags given on the command line win.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .experiment import (DEFAULT_MOVS, DEFAULT_N, FULL_SCALE_TRIALS, ConfigError, CsvSink,
                         ExperimentConfig, iter_experiment, parse_algorithms, read_csv,
                         report_bounds)
from .mov import check_families

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_IO = 3
EXIT_MOV_MISMATCH = 4

DEFAULTS = {
    "rule": "plurality",
    "m": "2",
    "n": str(DEFAULT_N),
    "mov": ",".join(map(str, DEFAULT_MOVS)),
    "k": "1,3,5",
    "s": "4..16",
    "trials": "10000",
    "alg": "quantum,classical",
    "seed": "0",
    "workers": "1",
}


def parse_int_list(text: str) -> list[int]:
    """``"1,3,5"`` or ``"4..16"`` (inclusive), or a mix: ``"2,4..6"``."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def parse_number_list(text: str) -> list[float]:
    out = []
    for part in str(text).split(","):
        if part.strip():
            value = float(part)
            out.append(int(value) if value.is_integer() else value)
    return out


def read_config_file(path) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config file: {err}") from None
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        values[key.lstrip("-").replace("_", "-")] = value
    return values


def _merged(args: argparse.Namespace, keys) -> dict[str, str]:
    from_file = read_config_file(args.config) if args.config else {}
    out = {}
    for key in keys:
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            out[key] = str(flag)
        elif key in from_file:
            out[key] = from_file[key]
        elif key in DEFAULTS:
            out[key] = DEFAULTS[key]
    return out


def _truthy(value: str | None) -> bool:
    return str(value).strip().lower() in ("1", "true", "yes", "on")


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    v = _merged(args, ("rule", "m", "n", "mov", "k", "s", "trials", "alg", "seed",
                       "out", "workers", "paper-scale", "no-timing"))
    try:
        trials = int(v["trials"])
        if _truthy(v.get("paper-scale")):
            trials = FULL_SCALE_TRIALS
        n = float(v["n"])
        return ExperimentConfig(
            rule=v["rule"], m=int(v["m"]), n=int(n) if n.is_integer() else n,
            mov_list=parse_number_list(v["mov"]), k_list=parse_int_list(v["k"]),
            s_range=parse_int_list(v["s"]), trials=trials,
            algorithms=parse_algorithms(v["alg"]), base_seed=int(v["seed"]),
            output=Path(v["out"]) if v.get("out") else None, workers=int(v["workers"]),
            record_timing=not _truthy(v.get("no-timing")))
    except ConfigError:
        raise
    except ValueError as err:
        raise ConfigError(str(err)) from None


def cmd_run(args: argparse.Namespace) -> int:
    config = build_config(args)
    skip = set()
    if args.resume and config.output is not None and config.output.exists():
        skip = {r.key() for r in read_csv(config.output)}
    sink = CsvSink(config.output, append=args.resume) if config.output else None
    feasible = total = 0
    out = sys.stdout
    try:
        executor = ProcessPoolExecutor(config.workers) if config.workers > 1 else None
        try:
            for record in iter_experiment(config, skip, executor):
                total += 1
                feasible += record.feasible
                if sink is not None:
                    sink.write(record)
                print(f"{record.algorithm:<18} mov={record.mov:<6} K={record.K} "
                      f"s={record.s:<3} pr_correct={record.pr_correct:.4f} "
                      f"+/- {record.ci_half_width:.4f}", file=out)
        finally:
            if executor is not None:
                executor.shutdown()
    finally:
        if sink is not None:
            sink.close()
    if total and not feasible:
        print("error: no cell had a feasible profile", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace) -> int:
    config = build_config(args)
    text = report_bounds(config)
    if config.output is not None:
        config.output.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_mov_check(args: argparse.Namespace) -> int:
    checks = check_families(k_max=args.k_max)
    print("family,n,m,rule,analytic,brute_force,agrees")
    for c in checks:
        found = "none" if c.brute_force is None else f"{c.brute_force:g}"
        print(f"{c.spec.family.value},{c.spec.n},{c.spec.m},{c.rule.value},"
              f"{c.analytic:g},{found},{c.agrees}")
    bad = sum(not c.agrees for c in checks)
    print(f"{len(checks) - bad}/{len(checks)} instances agree", file=sys.stderr)
    return EXIT_OK if not bad else EXIT_MOV_MISMATCH


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file supplying any flag")
    p.add_argument("--rule", help="plurality, borda, copeland or stv")
    p.add_argument("--m", help="number of candidates (2 or 4)")
    p.add_argument("--n", help="number of voters (default 2**20)")
    p.add_argument("--mov", help="comma-separated margins of victory")
    p.add_argument("--out", help="output CSV path")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qvote", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment grid and write CSV")
    _add_grid_flags(run)
    run.add_argument("--k", help="rounds K, e.g. 1,3,5")
    run.add_argument("--s", help="output bits, e.g. 4..16")
    run.add_argument("--trials", help="trials per cell (default 10000)")
    run.add_argument("--paper-scale", action="store_const", const="true", default=None,
                     help=f"use {FULL_SCALE_TRIALS} trials per cell")
    run.add_argument("--alg", help="quantum, classical(-with), classical-without")
    run.add_argument("--seed", help="base seed")
    run.add_argument("--workers", help="worker processes")
    run.add_argument("--no-timing", action="store_const", const="true", default=None,
                     help="write wall_ms as 0 so reruns are byte-identical")
    run.add_argument("--resume", action="store_true",
                     help="skip cells already present in --out and append")
    run.set_defaults(func=cmd_run)

    bounds = sub.add_parser("bounds", help="theoretical parameters per MoV")
    _add_grid_flags(bounds)
    bounds.set_defaults(func=cmd_bounds)

    check = sub.add_parser("mov-check", help="brute-force MoV vs family design")
    check.add_argument("--k-max", type=int, default=8)
    check.set_defaults(func=cmd_mov_check)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
