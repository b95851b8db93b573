import argparse
import functools
import logging
import sys
from typing import Any, Callable, Dict, List

from dotenv import dotenv_values
from pydantic import ValidationError

from vcstack.api.exceptions import (
    EXIT_FAILURE,
    EXIT_INVALID_PARAMETER,
    InvalidParameterException,
    VCException,
)
from vcstack.config import Config
from vcstack.utils.output import print_error

logger = logging.getLogger(__name__)


class OptionalBoolAction(argparse.Action):
    def __init__(self, option_strings, dest, nargs=None, **kwargs):
        if nargs is not None:
            raise ValueError("nargs not allowed")
        super(OptionalBoolAction, self).__init__(
            option_strings, dest, nargs=0, **kwargs
        )
        self.default = None

    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, True)


def add_common_arguments(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("Common settings")
    group.add_argument(
        "--config-file",
        type=str,
        help="Path to a key=value config file. Flags take precedence.",
        default=None,
    )
    group.add_argument(
        "-d",
        "--debug",
        action=OptionalBoolAction,
        help="Enable debug logging.",
    )
    group.add_argument(
        "--output",
        type=str,
        choices=["table", "json", "csv"],
        help="Output format. Default is a human table.",
    )
    group.add_argument(
        "--json",
        dest="output",
        action="store_const",
        const="json",
        help="Shorthand for --output json.",
    )
    group.add_argument(
        "--csv",
        dest="output",
        action="store_const",
        const="csv",
        help="Shorthand for --output csv.",
    )
    group.add_argument(
        "--output-file",
        type=str,
        help="Write the report to this file instead of stdout.",
        default=None,
    )
    group.add_argument(
        "--no-progress",
        dest="progress",
        action="store_const",
        const=False,
        help="Hide progress bars.",
    )


def load_config_file(path: str) -> Dict[str, Any]:
    try:
        values = dotenv_values(path)
    except OSError as e:
        raise InvalidParameterException(f"Cannot read config file {path}: {e}")
    return {
        key.strip().lower().replace("-", "_"): value
        for key, value in values.items()
        if value is not None
    }


def set_config_option(args, config_data: dict, option_name: str):
    option_value = getattr(args, option_name, None)
    if option_value is not None:
        config_data[option_name] = option_value


COMMON_OPTIONS = ["debug", "output", "progress"]


def merge_options(args: argparse.Namespace, options: List[str]) -> Dict[str, Any]:
    """Config file values overlaid with every flag that was given."""
    config_data = {}
    if getattr(args, "config_file", None):
        config_data.update(load_config_file(args.config_file))

    # CLI args have higher priority than config file
    for option in COMMON_OPTIONS + options:
        set_config_option(args, config_data, option)
    return config_data


def parse_config(args: argparse.Namespace, options: List[str]) -> Config:
    return Config(**merge_options(args, options))


def handle_errors(func: Callable[[argparse.Namespace], None]):
    """Run a command and exit with the code of any error it raises."""

    @functools.wraps(func)
    def wrapper(args: argparse.Namespace):
        try:
            func(args)
        except VCException as e:
            logger.debug(f"{e.reason}: {e.message}", exc_info=True)
            print_error(str(e))
            sys.exit(e.exit_code)
        except ValidationError as e:
            print_error(f"InvalidParameter: {e}")
            sys.exit(EXIT_INVALID_PARAMETER)
        except Exception as e:
            logger.exception(e)
            print_error(str(e))
            sys.exit(EXIT_FAILURE)

    return wrapper
