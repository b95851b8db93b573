import argparse
from importlib import metadata

from vcstack import __git_commit__, __version__

CRYPTO_DEPENDENCIES = ["py-ecc", "numpy"]


def setup_version_cmd(subparsers: argparse._SubParsersAction):
    parser: argparse.ArgumentParser = subparsers.add_parser(
        "version",
        help="Print version.",
        description="Print version and the versions of the arithmetic libraries.",
    )
    parser.add_argument(
        "--short",
        action="store_true",
        help="Print the version only.",
        default=False,
    )
    parser.set_defaults(func=run)


def dependency_versions() -> dict:
    versions = {}
    for name in CRYPTO_DEPENDENCIES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "missing"
    return versions


def run(args):
    if args.short:
        print(__version__)
        return
    print(f"vcstack {__version__} ({__git_commit__})")
    for name, version in dependency_versions().items():
        print(f"  {name} {version}")
