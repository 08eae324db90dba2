"""``coded-matmul`` command line.

Verbs::

    run <config> [--out FILE] [--workers N]
    preset <fig1|fig2|fig4|fig5|table4> [--seed N] [--trials N] [--out FILE] [--workers N]
    selftest <scheme> [--k K] [--b B] [--sigma S] [--seed N] [--stragglers N] [--n N]
    code validate <catalog-file>
    plotdata <csv> --out DIR

``CODED_MATMUL_SEED`` supplies the seed when ``--seed`` is absent.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import catalog
from .arraycode import ArrayCode, recovery_threshold, validate_mds, validate_sampled
from .experiments import PRESETS, ConfigError, emit_plotdata, parse_config, run_preset, run_scenario, selftest, write_csv


def _env_seed() -> int:
    raw = os.environ.get("CODED_MATMUL_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"CODED_MATMUL_SEED must be an integer, got {raw!r}") from None


def _emit(rows, out: str | None) -> None:
    if out is None:
        write_csv(rows, sys.stdout)
        return
    with open(out, "w", newline="") as fh:
        write_csv(rows, fh)


def _cmd_run(args) -> int:
    try:
        scenarios = parse_config(Path(args.config).read_text())
    except ConfigError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return 2
    rows = []
    for sc in scenarios:
        if args.seed is not None:
            sc = replace(sc, seed=args.seed)
        elif "CODED_MATMUL_SEED" in os.environ:
            sc = replace(sc, seed=_env_seed())
        rows.extend(run_scenario(sc, args.workers))
    _emit(rows, args.out)
    return 0


def _cmd_preset(args) -> int:
    seed = args.seed if args.seed is not None else _env_seed()
    _emit(run_preset(args.name, seed, args.trials, args.workers), args.out)
    return 0


def _cmd_selftest(args) -> int:
    seed = args.seed if args.seed is not None else _env_seed()
    report = selftest(args.scheme, args.k, args.b, args.sigma, seed, n=args.n, stragglers=args.stragglers, s=args.s)
    print(report.summary())
    return 0 if report.ok else 1


def _cmd_code_validate(args) -> int:
    try:
        code = catalog.load(args.file)
    except (OSError, catalog.CatalogError) as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return 2
    if isinstance(code, ArrayCode):
        ok, witness = validate_mds(code)
        print(f"arraycode n={code.n} k={code.k} b={code.b} sigma={code.sigma}")
        if not ok:
            print(f"NOT MDS: nodes {list(witness)} do not peel")
            return 1
        print("MDS: every k-node subset peels")
        if args.threshold:
            print(f"recovery threshold: {recovery_threshold(code)}")
        return 0
    check = validate_sampled(code, args.samples, args.seed)
    kind = "exhaustive" if check.exhaustive else "sampled"
    print(f"asymcode n={code.n} k={code.k} b={code.b} b'={code.b_prime} epsilon={code.epsilon:.4g}")
    if not check.ok:
        print(f"FAIL ({kind}, {check.failures}/{check.checked}): nodes {list(check.witness)} do not peel")
        return 1
    print(f"OK ({kind}, {check.checked} subsets)")
    return 0


def _cmd_plotdata(args) -> int:
    try:
        written = emit_plotdata(Path(args.csv), args.out)
    except (OSError, ValueError) as exc:
        print(f"{args.csv}: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coded-matmul", description="Straggler-tolerant coded matrix multiplication.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="run the scenarios in a config file")
    p.add_argument("config")
    p.add_argument("--out")
    p.add_argument("--seed", type=int, help="override every scenario's seed")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("preset", help="run a built-in experiment")
    p.add_argument("name", choices=PRESETS)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_preset)

    p = sub.add_parser("selftest", help="end-to-end exactness check on random operands")
    p.add_argument("scheme", choices=("uncoded", "poly", "matdot", "amds"))
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--b", type=int, default=2)
    p.add_argument("--sigma", type=int, default=2)
    p.add_argument("--n", type=int, help="nodes (poly/matdot: workers = n b)")
    p.add_argument("--stragglers", type=int, help="default: the most the scheme tolerates (0 for uncoded)")
    p.add_argument("--s", type=int, default=8, help="inner dimension")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_selftest)

    p = sub.add_parser("code", help="code catalog utilities")
    code_sub = p.add_subparsers(dest="code_verb", required=True)
    v = code_sub.add_parser("validate", help="check a catalog file's MDS property")
    v.add_argument("file")
    v.add_argument("--threshold", action="store_true", help="also compute the exact recovery threshold")
    v.add_argument("--samples", type=int, default=1000)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=_cmd_code_validate)

    p = sub.add_parser("plotdata", help="split a CSV into per-curve series files")
    p.add_argument("csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_plotdata)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
