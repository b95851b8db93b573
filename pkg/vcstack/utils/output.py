import sys

from colorama import Fore, Style


def print_error(message):
    print(f"{Fore.RED}{message}{Style.RESET_ALL}", file=sys.stderr)


def print_success(message):
    print(f"{Fore.GREEN}{message}{Style.RESET_ALL}", file=sys.stderr)


def print_result(text: str, path: str = None):
    """Write ``text`` to ``path``, or to stdout when no path is given."""
    if path:
        with open(path, "w") as file:
            file.write(text)
            if not text.endswith("\n"):
                file.write("\n")
        return
    print(text)
