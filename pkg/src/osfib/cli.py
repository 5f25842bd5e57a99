"""Command line entry point: ``osfib run|verify|lower-bound|plot-data``.

Exit status is 0 on success, 1 when a check fails or output cannot be
written, and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path
from typing import List, Optional

from osfib import __version__
from osfib.core import OsfibError
from osfib.lowerbound import bwp_sweep, chernoff_grid, make_family, regret_scaling_probe
from osfib.policies import POLICY_NAMES
from osfib.runner import INSTANCE_KINDS, ExperimentConfig, emit_plot_data, fmt, run_experiment
from osfib.verify import CHECK_HEADER, SUITES

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _default_seed() -> int:
    return int(os.environ.get("OSFIB_SEED", "0"))


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _int_list(text: str) -> List[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def read_config_file(path: str) -> List[str]:
    """Turn ``key = value`` lines into the equivalent ``--key value`` flags."""
    argv = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"{path}: expected 'key = value', got {raw!r}")
        argv += [f"--{key.strip()}", value.strip()]
    return argv


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="osfib", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one policy on one instance")
    run.add_argument("--config", help="file of 'key = value' lines mirroring these flags")
    run.add_argument("--algo", choices=POLICY_NAMES, default="elim")
    run.add_argument("--instance", choices=INSTANCE_KINDS, default="uniform-gap")
    run.add_argument("--k", type=_positive_int, default=20, help="number of arms")
    run.add_argument("--horizon", type=_positive_int, default=100_000)
    run.add_argument("--runs", type=_positive_int, default=100)
    run.add_argument("--delta", type=float, default=0.1, help="gap of the uniform-gap instance")
    run.add_argument("--lambda", dest="lam", type=float, default=0.1, help="best-arm offset of the random-mean instance")
    run.add_argument("--best", type=_positive_int, default=17, help="1-indexed position of the best arm")
    run.add_argument("--base", type=float, default=0.6, help="suboptimal mean of the uniform-gap instance")
    run.add_argument("--lo", type=float, default=0.2)
    run.add_argument("--hi", type=float, default=0.6)
    run.add_argument("--instance-seed", type=int, default=None, help="seed for random means (default: --seed)")
    run.add_argument("--seed", type=int, default=_default_seed(), help="master seed (default: $OSFIB_SEED or 0)")
    run.add_argument("--bidders", type=_positive_int, default=2)
    run.add_argument("--reserves", type=_float_list, default=None, help="comma-separated ascending reserves")
    run.add_argument("--checkpoints", type=_int_list, default=None, help="comma-separated rounds to record")
    run.add_argument("--workers", type=_positive_int, default=1)
    run.add_argument("--out", required=True, help="output directory")

    ver = sub.add_parser("verify", help="run numerical check suites")
    ver.add_argument("--suite", choices=sorted(SUITES) + ["all"], default="all")
    ver.add_argument("--out", help="CSV file (default: stdout)")

    low = sub.add_parser("lower-bound", help="lower-bound experiments")
    low.add_argument("--suite", choices=["tail", "bwp", "scaling", "all"], default="all")
    low.add_argument("--k", type=_positive_int, default=20)
    low.add_argument("--eps", type=float, default=0.2)
    low.add_argument("--horizons", type=_int_list, default=[10, 30, 100, 300, 1000, 3000, 10000])
    low.add_argument("--ks", type=_int_list, default=[2, 5, 10, 20, 50])
    low.add_argument("--scaling-horizon", type=_positive_int, default=10_000)
    low.add_argument("--runs", type=_positive_int, default=200)
    low.add_argument("--seed", type=int, default=_default_seed())
    low.add_argument("--out", required=True, help="output directory")

    plot = sub.add_parser("plot-data", help="merge summaries into one long-format CSV")
    plot.add_argument("--summary", action="append", required=True, metavar="ALGO=PATH")
    plot.add_argument("--out", required=True)
    return parser


def _parse(argv: List[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run" and args.config:
        try:
            file_argv = read_config_file(args.config)
        except (OSError, argparse.ArgumentTypeError) as exc:
            parser.error(str(exc))
        # file values first so explicit flags win
        args = parser.parse_args(["run"] + file_argv + argv[argv.index("run") + 1 :])
    return args


def _write_rows(path: Optional[str], header, rows) -> None:
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if path:
            fh.close()


def cmd_run(args) -> int:
    cfg = ExperimentConfig(
        algo=args.algo,
        instance=args.instance,
        k=args.k,
        horizon=args.horizon,
        runs=args.runs,
        delta=args.delta,
        lam=args.lam,
        best=args.best,
        base=args.base,
        lo=args.lo,
        hi=args.hi,
        instance_seed=args.instance_seed,
        seed=args.seed,
        bidders=args.bidders,
        reserves=args.reserves,
        checkpoints=args.checkpoints,
        out=args.out,
        workers=args.workers,
    )
    _, summary = run_experiment(cfg)
    last = summary[-1]
    print(f"{cfg.algo}: T={last.t} mean regret {last.mean:.4f} (99% CI {last.ci_low:.4f}..{last.ci_high:.4f})")
    return EXIT_OK


def cmd_verify(args) -> int:
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    rows = [row for name in names for row in SUITES[name]()]
    _write_rows(
        args.out,
        CHECK_HEADER,
        ([r.check_name, r.params, fmt(r.lhs), fmt(r.rhs), "true" if r.passed else "false"] for r in rows),
    )
    failed = [r for r in rows if not r.passed]
    for r in failed:
        print(f"FAIL {r.check_name} {r.params}: {r.lhs} vs {r.rhs}", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_lower_bound(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ok = True
    if args.suite in ("tail", "all"):
        grid = chernoff_grid()
        ok &= all(r.holds for r in grid if r.precondition_met)
        _write_rows(
            out / "reverse_chernoff.csv",
            ("n", "delta", "exact_tail", "bound", "holds"),
            ([r.n, fmt(r.delta), fmt(float(r.exact_tail)), fmt(r.bound), str(r.holds).lower()] for r in grid),
        )
    if args.suite in ("bwp", "all"):
        family = make_family(args.k, args.eps)
        results = bwp_sweep(family, args.horizons, args.runs, seed=args.seed)
        _write_rows(
            out / "bwp.csv",
            ("K", "T", "member", "success_freq"),
            ([res.K, res.T, j + 1, fmt(res.success[j])] for res in results for j in range(res.K)),
        )
    if args.suite in ("scaling", "all"):
        rows = regret_scaling_probe(args.ks, args.scaling_horizon, args.runs, seed=args.seed)
        _write_rows(
            out / "scaling.csv",
            ("K", "T", "eps", "runs", "mean", "ci_low", "ci_high"),
            ([r.K, r.T, fmt(r.eps), r.runs, fmt(r.mean), fmt(r.ci_low), fmt(r.ci_high)] for r in rows),
        )
    meta = {"suite": args.suite, "seed": args.seed, "version": __version__}
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_plot_data(args) -> int:
    sources = {}
    for item in args.summary:
        algo, sep, path = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected ALGO=PATH, got {item!r}")
        sources[algo] = path
    emit_plot_data(sources, args.out)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "lower-bound": cmd_lower_bound, "plot-data": cmd_plot_data}


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except argparse.ArgumentTypeError as exc:
        print(f"osfib: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OsfibError as exc:
        print(f"osfib: error: {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc, ValueError) else EXIT_FAIL
    except OSError as exc:
        print(f"osfib: I/O error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
