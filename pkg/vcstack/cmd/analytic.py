import argparse
import logging
from typing import List, Tuple

from vcstack.api.exceptions import InvalidParameterException
from vcstack.bench.analytic import (
    AnalyticInputs,
    analytic_params,
    analytic_table2,
    analytic_table3,
    analytic_table4,
    k_from_gas,
    params_json,
    parse_nu_list,
)
from vcstack.bench.report import format_report
from vcstack.cmd.common import add_common_arguments, handle_errors, merge_options
from vcstack.config import Config
from vcstack.logging import setup_logging
from vcstack.utils.output import print_result

logger = logging.getLogger(__name__)

TABLES = {
    "2": analytic_table2,
    "3": analytic_table3,
    "4": analytic_table4,
}

ANALYTIC_OPTIONS = [
    "group_bytes",
    "hash_node_bytes",
    "t_group_seconds",
    "t_hash_seconds",
    "gas_limit",
    "gas_per_transfer",
]
SHAPE_OPTIONS = ["n", "k", "nu", "c"]


def setup_analytic_cmd(subparsers: argparse._SubParsersAction):
    parser: argparse.ArgumentParser = subparsers.add_parser(
        "analytic",
        help="Evaluate the closed-form cost tables.",
        description="Evaluate the closed-form cost tables at blockchain scale.",
    )
    add_common_arguments(parser)

    group = parser.add_argument_group("Model settings")
    group.add_argument(
        "--table",
        type=str,
        choices=["2", "3", "4", "params"],
        required=True,
        help="Table to evaluate.",
    )
    group.add_argument("--n", type=int, help="Vector length. Default is 2^24.")
    group.add_argument(
        "--k",
        type=int,
        help="Updates per block. Default is 460, or derived from --gas-limit.",
        default=None,
    )
    group.add_argument(
        "--nu",
        type=str,
        nargs="+",
        help="Tradeoff parameters, one row each. Default is 0 1/4 1/2 3/4 1.",
        default=None,
    )
    group.add_argument(
        "--c",
        type=int,
        nargs="+",
        help="Verkle degrees. Default is 2 4 16 64 256.",
        default=None,
    )
    group.add_argument("--group-bytes", type=int, help="Size of a group element.")
    group.add_argument(
        "--hash-node-bytes", type=int, help="Size of a lattice tree node."
    )
    group.add_argument(
        "--t-group-seconds", type=float, help="Time of one group exponentiation."
    )
    group.add_argument(
        "--t-hash-seconds", type=float, help="Time of one lattice hash evaluation."
    )
    group.add_argument(
        "--gas-limit",
        type=int,
        help="Block gas limit. Derives k as 2 * floor(gas limit / gas per transfer).",
    )
    group.add_argument(
        "--gas-per-transfer",
        type=int,
        help="Gas used by one token transfer. Default is 65000.",
    )

    parser.set_defaults(func=run)


def _int_option(name: str, value) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise InvalidParameterException(f"{name} must be an integer, got {value}")


def _list_option(value) -> List[str]:
    # config files give "0 1/4 1/2" or "0,1/4,1/2"; flags give a list
    if isinstance(value, str):
        return value.replace(",", " ").split()
    return [str(v) for v in value]


def model_inputs(args: argparse.Namespace) -> Tuple[Config, AnalyticInputs]:
    """Config for the common settings plus the model shape.

    The shape is kept out of Config, whose desk-scale bounds do not apply to
    the closed-form tables.
    """
    options = merge_options(args, ANALYTIC_OPTIONS + SHAPE_OPTIONS)
    shape = {key: options.pop(key) for key in SHAPE_OPTIONS if key in options}
    cfg = Config(**options)

    if "k" in shape:
        k = _int_option("k", shape["k"])
    elif cfg.gas_limit is not None:
        k = k_from_gas(cfg.gas_limit, cfg.gas_per_transfer)
        logger.info(f"Derived k={k} from the gas limit")
    else:
        k = AnalyticInputs.k

    inputs = AnalyticInputs(
        n=_int_option("n", shape.get("n", AnalyticInputs.n)),
        k=k,
        group_bytes=cfg.group_bytes,
        hash_node_bytes=cfg.hash_node_bytes,
        t_group_seconds=cfg.t_group_seconds,
        t_hash_seconds=cfg.t_hash_seconds,
    )
    if "nu" in shape:
        inputs.nu = parse_nu_list(_list_option(shape["nu"]))
        inputs.__post_init__()
    if "c" in shape:
        degrees = [_int_option("c", c) for c in _list_option(shape["c"])]
        if not degrees:
            raise InvalidParameterException("At least one Verkle degree is needed")
        inputs.degrees = degrees
        inputs.c = degrees[-1]
    return cfg, inputs


@handle_errors
def run(args: argparse.Namespace):
    cfg, inputs = model_inputs(args)
    setup_logging(cfg.debug)

    if args.table == "params":
        sizes = analytic_params(inputs)
        if cfg.output == "json":
            text = params_json(sizes)
        elif cfg.output == "csv":
            text = sizes.to_csv()
        else:
            text = sizes.render()
    else:
        text = format_report(TABLES[args.table](inputs), cfg.output)

    print_result(text, args.output_file)
