import argparse

from vcstack.api.exceptions import VerificationFailedException
from vcstack.bench.report import format_report
from vcstack.bench.timing import BenchSettings, bench_report, run_bench, write_metrics
from vcstack.cmd.common import (
    OptionalBoolAction,
    add_common_arguments,
    handle_errors,
    merge_options,
)
from vcstack.config import Config
from vcstack.logging import setup_logging
from vcstack.utils.output import print_result

BENCH_OPTIONS = [
    "n",
    "k",
    "nu",
    "seed",
    "users",
    "insecure_debug_trapdoor",
    "metrics_file",
]

# Bench sizes that differ from the e2e defaults in Config.
BENCH_DEFAULTS = {"n": BenchSettings.n, "k": BenchSettings.k}


def setup_bench_cmd(subparsers: argparse._SubParsersAction):
    parser: argparse.ArgumentParser = subparsers.add_parser(
        "bench",
        help="Time AMT proof updates against the exponentiation model.",
        description="Time AMT proof updates on the zero vector and compare them "
        "with (partial digests) x (measured exponentiation time).",
    )
    add_common_arguments(parser)

    group = parser.add_argument_group("Bench settings")
    group.add_argument("--n", type=int, help="Default is 2^16.")
    group.add_argument("--k", type=int, help="Default is 460.")
    group.add_argument("--nu", type=str, help="Default is 1/2.")
    group.add_argument("--seed", type=int, help="Default is 0.")
    group.add_argument(
        "--users", type=int, help="Proofs to time. Default is 16, at most N."
    )
    group.add_argument(
        "--exp-samples",
        type=int,
        default=32,
        help="Exponentiations averaged for T_G. Default is 32.",
    )
    group.add_argument(
        "--insecure-debug-trapdoor",
        action=OptionalBoolAction,
        help="Keep the setup trapdoor. Fast, and never safe outside tests.",
    )
    group.add_argument(
        "--metrics-file",
        type=str,
        help="Write Prometheus text metrics to this file.",
    )
    parser.set_defaults(func=run)


def bench_config(args: argparse.Namespace) -> Config:
    options = merge_options(args, BENCH_OPTIONS)
    for key, value in BENCH_DEFAULTS.items():
        options.setdefault(key, value)
    return Config(**options)


@handle_errors
def run(args: argparse.Namespace):
    cfg = bench_config(args)
    setup_logging(cfg.debug)

    settings = BenchSettings(
        n=cfg.n,
        k=cfg.k,
        nu=cfg.nu,
        seed=cfg.seed,
        users=cfg.users or min(16, cfg.n),
        exp_samples=max(args.exp_samples, 1),
        insecure_debug=cfg.insecure_debug_trapdoor,
        progress=cfg.progress,
    )
    result = run_bench(settings)
    print_result(format_report(bench_report(result), cfg.output), args.output_file)
    if cfg.metrics_file:
        write_metrics(result, cfg.metrics_file)

    if not result.passed:
        raise VerificationFailedException(
            f"Measured proof updates are {result.ratio:.2f}x the model"
        )
