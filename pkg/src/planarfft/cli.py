"""Command line entry point: ``planarfft {bench,verify,plan}``.

Exit codes: 0 success, 1 verification refusal, 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .bench import BenchConfig, STRATEGY_NAMES, run_strong_scaling, verify_mode
from .errors import ConfigError, InvalidArgumentError, UnsupportedSizeError
from .kernel import BACKEND_NAME
from .planner import PlanningMode, make_plan, wisdom_load, wisdom_save

EXIT_OK, EXIT_REFUSED, EXIT_CONFIG = 0, 1, 2


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _add_problem_args(p, *, sweep=True):
    p.add_argument("--rows", type=int, default=4096)
    p.add_argument("--cols", type=int, default=4096)
    p.add_argument("--strategy", type=_str_list, default=["for_loop"],
                   help=f"comma-separated, from {{{'|'.join(STRATEGY_NAMES)}}}")
    p.add_argument("--workers", type=_int_list, default=[1, 2, 4, 8],
                   help="worker counts to sweep for shared-memory strategies")
    p.add_argument("--ranks", type=_int_list, default=[1], help="rank counts for the dist strategy")
    p.add_argument("--threads", type=_int_list, default=[1], help="threads per rank for the dist strategy")
    p.add_argument("--plan", choices=[m.value for m in PlanningMode], default="estimate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--wisdom", default=None, help="wisdom file to read and update")
    if sweep:
        p.add_argument("--reps", type=int, default=10)
        p.add_argument("--measure-reps", type=int, default=3, help="repetitions per planner candidate")


def build_parser():
    parser = argparse.ArgumentParser(prog="planarfft", description="Parallel 2D r2c FFT benchmark harness")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND_NAME} kernels)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run a strong-scaling sweep and write CSV")
    _add_problem_args(bench)
    bench.add_argument("--out", default=None, help="CSV path (default bench-<plan>.csv)")
    bench.add_argument("--force", action="store_true", help="run even if verification fails")

    verify = sub.add_parser("verify", help="check the configured engines against the brute-force oracle")
    _add_problem_args(verify)

    plan = sub.add_parser("plan", help="print the plan chosen for one configuration")
    _add_problem_args(plan)
    return parser


def _config(args) -> BenchConfig:
    return BenchConfig(
        rows=args.rows, cols=args.cols, strategies=args.strategy, workers=args.workers,
        ranks=args.ranks, threads=args.threads, reps=getattr(args, "reps", 10), plan=args.plan,
        seed=args.seed, out=getattr(args, "out", None), wisdom=args.wisdom,
        force=getattr(args, "force", False), measure_reps=getattr(args, "measure_reps", 3),
    ).validate()


def _cmd_verify(cfg, args):
    report = verify_mode(cfg)
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_REFUSED


def _cmd_bench(cfg, args):
    report = verify_mode(cfg)
    print(report.summary())
    if not report.passed:
        if not cfg.force:
            print("refusing to benchmark a build that fails verification (use --force to override)",
                  file=sys.stderr)
            return EXIT_REFUSED
        print("verification failed; continuing because of --force", file=sys.stderr)
    if cfg.out is None:
        cfg.out = f"bench-{cfg.plan.value}.csv"
    records = run_strong_scaling(cfg)
    for r in records:
        status = f"FAILED: {r.error}" if r.failed else (
            f"median {r.median_s:.4g} s  [{r.min_s:.4g}, {r.max_s:.4g}]  fft {r.fft_frac:.2f} / transpose {r.transpose_frac:.2f}"
        )
        print(f"{r.strategy:>8} ({r.ranks}/{r.threads}): {status}")
    print(f"wrote {cfg.out}")
    return EXIT_OK


def _cmd_plan(cfg, args):
    wisdom = wisdom_load(cfg.wisdom) if cfg.wisdom else None
    strategy = cfg.strategies[0]
    threads = cfg.workers[-1]
    if strategy == "dist":
        strategy, threads = "for_loop", cfg.threads[-1]
    kwargs = {}
    if cfg.plan is PlanningMode.MEASURE:
        kwargs = dict(reps=cfg.measure_reps, wisdom=wisdom, seed=cfg.seed)
    plan = make_plan(cfg.rows, cfg.cols, threads, strategy, cfg.plan, **kwargs)
    print(plan.describe())
    if wisdom is not None and cfg.plan is PlanningMode.MEASURE:
        wisdom_save(wisdom, cfg.wisdom)
    return EXIT_OK


COMMANDS = {"bench": _cmd_bench, "verify": _cmd_verify, "plan": _cmd_plan}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, InvalidArgumentError, UnsupportedSizeError) as exc:
        print(f"planarfft: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
