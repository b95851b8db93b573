import argparse
import logging

from vcstack.api.exceptions import VerificationFailedException
from vcstack.bench.e2e import E2eSettings, run_e2e
from vcstack.bench.report import format_report
from vcstack.cmd.common import (
    OptionalBoolAction,
    add_common_arguments,
    handle_errors,
    parse_config,
)
from vcstack.config import Config
from vcstack.logging import setup_logging
from vcstack.utils.output import print_result

logger = logging.getLogger(__name__)

E2E_OPTIONS = [
    "backend",
    "n",
    "k",
    "nu",
    "c",
    "mode",
    "seed",
    "users",
    "workers",
    "insecure_debug_trapdoor",
    "kzg_table_limit",
]


def add_run_arguments(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("Run settings")
    group.add_argument(
        "--backend",
        type=str,
        choices=["merkle", "kzg", "amt", "lattice", "verkle"],
        help="Vector commitment backend. Default is amt.",
    )
    group.add_argument("--n", type=int, help="Vector length. Default is 1024.")
    group.add_argument("--k", type=int, help="Updates per batch. Default is 32.")
    group.add_argument(
        "--nu", type=str, help="Tradeoff parameter in [0, 1]. Default is 1/2."
    )
    group.add_argument("--c", type=int, help="Verkle degree. Default is 4.")
    group.add_argument(
        "--mode",
        type=str,
        choices=["structured", "no-info"],
        help="Update information mode for amt and lattice.",
    )
    group.add_argument("--seed", type=int, help="Seed. Default is 0.")
    group.add_argument(
        "--users",
        type=int,
        help="Proof holders to refresh. Default is every index.",
    )
    group.add_argument(
        "--workers",
        type=int,
        help="Processes for proof updates. Default is physical cores up to 4.",
    )
    group.add_argument(
        "--kzg-table-limit",
        type=int,
        help="Largest KZG domain with a precomputed proof matrix.",
    )
    group.add_argument(
        "--insecure-debug-trapdoor",
        action=OptionalBoolAction,
        help="Keep the setup trapdoor so commitments skip multi-scalar "
        "multiplication. Fast, and never safe outside tests.",
    )


def setup_e2e_cmd(subparsers: argparse._SubParsersAction):
    parser: argparse.ArgumentParser = subparsers.add_parser(
        "e2e",
        help="Run commit, update and proof updates end to end.",
        description="Run commit, update and proof updates end to end, checking "
        "every refreshed proof against a fresh opening.",
    )
    add_common_arguments(parser)
    add_run_arguments(parser)
    parser.set_defaults(func=run)


def settings_from_config(cfg: Config) -> E2eSettings:
    return E2eSettings(
        backend=cfg.backend,
        n=cfg.n,
        k=cfg.k,
        nu=cfg.nu,
        seed=cfg.seed,
        c=cfg.c,
        mode=cfg.mode,
        users=cfg.users,
        workers=cfg.workers,
        insecure_debug=cfg.insecure_debug_trapdoor,
        kzg_table_limit=cfg.kzg_table_limit,
        progress=cfg.progress,
        debug=cfg.debug,
    )


@handle_errors
def run(args: argparse.Namespace):
    cfg = parse_config(args, E2E_OPTIONS)
    setup_logging(cfg.debug)

    outcome = run_e2e(settings_from_config(cfg))
    print_result(format_report(outcome.report, cfg.output), args.output_file)

    if not outcome.report.passed:
        if outcome.failures:
            raise VerificationFailedException(
                f"{len(outcome.failures)} refreshed proofs failed: "
                f"{outcome.failures[:10]}"
            )
        raise VerificationFailedException("Update counters exceed the bounds")
