from datetime import datetime, timezone
import logging

from tqdm import tqdm


class TqdmHandler(logging.StreamHandler):
    """Writes records above any live progress bar instead of through it."""

    def emit(self, record: logging.LogRecord):
        try:
            tqdm.write(self.format(record), file=self.stream)
        except Exception:
            self.handleError(record)


def _local_iso_time(formatter, record, datefmt=None) -> str:
    return (
        datetime.fromtimestamp(record.created, timezone.utc)
        .astimezone()
        .isoformat(timespec="seconds")
    )


def setup_logging(debug: bool = False):
    """Configure the root logger. Reports own stdout; logs go to stderr."""
    level = logging.DEBUG if debug else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[TqdmHandler()],
        force=True,
    )
    logging.Formatter.formatTime = _local_iso_time

    for logger_name in ["concurrent.futures", "numexpr.utils"]:
        logging.getLogger(logger_name).disabled = True
