import argparse
import json
import logging

import pandas as pd

from vcstack.api.exceptions import InvalidParameterException
from vcstack.bench.e2e import first_batch
from vcstack.cmd.common import add_common_arguments, handle_errors, parse_config
from vcstack.cmd.e2e import E2E_OPTIONS, add_run_arguments, settings_from_config
from vcstack.logging import setup_logging
from vcstack.schemas import BackendId, UpdateInfo
from vcstack.utils.output import print_result, print_success

logger = logging.getLogger(__name__)


def setup_updinfo_cmd(subparsers: argparse._SubParsersAction):
    parser: argparse.ArgumentParser = subparsers.add_parser(
        "updinfo",
        help="Encode or decode update information.",
        description="Encode or decode the binary update information format.",
    )
    actions = parser.add_subparsers(help="updinfo action", dest="action")

    encode = actions.add_parser(
        "encode",
        help="Write U of a seeded run's first batch to a file.",
    )
    add_common_arguments(encode)
    add_run_arguments(encode)
    encode.add_argument("path", type=str, help="File to write.")
    encode.set_defaults(func=run_encode)

    decode = actions.add_parser("decode", help="Print the entries of an encoded U.")
    add_common_arguments(decode)
    decode.add_argument("path", type=str, help="File to read.")
    decode.set_defaults(func=run_decode)


@handle_errors
def run_encode(args: argparse.Namespace):
    cfg = parse_config(args, E2E_OPTIONS)
    setup_logging(cfg.debug)

    update_info, batch = first_batch(settings_from_config(cfg))
    data = update_info.encode()
    with open(args.path, "wb") as file:
        file.write(data)
    print_success(
        f"Wrote {len(update_info)} entries ({len(data)} bytes) for k={batch.k} "
        f"to {args.path}"
    )


def backend_name(backend_id: int) -> str:
    if backend_id & 0xF0 == BackendId.VERKLE:
        return f"verkle c={BackendId.arity_of(backend_id)}"
    try:
        return BackendId(backend_id).name.lower()
    except ValueError:
        return f"unknown 0x{backend_id:02x}"


def describe(update_info: UpdateInfo) -> dict:
    return {
        "backend": backend_name(update_info.backend_id),
        "backend_id": update_info.backend_id,
        "height": update_info.height,
        "entries": [
            {"depth": path.depth, "path": str(path), "value": value.hex()}
            for path, value in update_info
        ],
    }


@handle_errors
def run_decode(args: argparse.Namespace):
    cfg = parse_config(args, [])
    setup_logging(cfg.debug)

    try:
        with open(args.path, "rb") as file:
            data = file.read()
    except OSError as e:
        raise InvalidParameterException(f"Cannot read {args.path}: {e}")
    update_info = UpdateInfo.decode(data)
    info = describe(update_info)

    if cfg.output == "json":
        text = json.dumps(info, indent=2)
    else:
        df = pd.DataFrame.from_records(
            info["entries"], columns=["depth", "path", "value"]
        )
        if cfg.output == "csv":
            text = df.to_csv(index=False)
        else:
            header = (
                f"### {info['backend']} update info, height {info['height']}, "
                f"{len(update_info)} entries"
            )
            table = df.to_markdown(index=False, disable_numparse=True)
            text = header + "\n\n" + table
    print_result(text, args.output_file)
