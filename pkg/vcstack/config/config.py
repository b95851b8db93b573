from fractions import Fraction
from typing import Optional

import psutil
from pydantic import model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from vcstack.api.exceptions import InvalidParameterException
from vcstack.schemas import tree_height

BACKEND_NAMES = ("merkle", "kzg", "amt", "lattice", "verkle")
PAIRING_BACKENDS = ("kzg", "amt", "verkle")
UPDATE_MODES = ("structured", "no-info")
OUTPUT_FORMATS = ("table", "json", "csv")
VERKLE_DEGREES = (2, 4, 16, 64, 256)

MAX_PAIRING_N = 2**16
MAX_LATTICE_N = 2**8
MAX_WORKERS = 4


def default_workers() -> int:
    cores = psutil.cpu_count(logical=False)
    if not cores:
        return 1
    return min(cores, MAX_WORKERS)


class Config(BaseSettings):
    """A class used to define vcstack configuration.

    Attributes:
        debug: Enable debug logging.
        backend: Vector commitment backend for e2e and updinfo.
        n: Vector length.
        k: Updates per batch.
        nu: Tradeoff parameter in [0, 1], as a fraction string like "1/2".
        c: Verkle degree.
        mode: "structured" or "no-info" update information for amt and lattice.
        seed: Seed for the setup, the messages and the batch.
        users: Proof holders refreshed per e2e run. All N by default.
        workers: Processes for proof updates. Physical cores up to 4 by default.
        insecure_debug_trapdoor: Keep the setup trapdoor so commitments skip
                                 multi-scalar multiplication. Test-only.
        kzg_table_limit: Largest domain whose Lagrange proof matrix is
                         precomputed.
        output: table, json or csv.
        progress: Show progress bars on stderr.

        group_bytes: Analytic size of a group element.
        hash_node_bytes: Analytic size of a lattice tree node.
        t_group_seconds: Analytic time of one group exponentiation.
        t_hash_seconds: Analytic time of one lattice hash evaluation.
        gas_limit: Block gas limit; when set, k is derived from it.
        gas_per_transfer: Gas used by one token transfer.
        metrics_file: Where bench writes Prometheus text metrics.
    """

    model_config = SettingsConfigDict(extra="ignore")

    debug: bool = False
    backend: str = "amt"
    n: int = 2**10
    k: int = 32
    nu: str = "1/2"
    c: int = 4
    mode: str = "structured"
    seed: int = 0
    users: Optional[int] = None
    workers: Optional[int] = None
    insecure_debug_trapdoor: bool = False
    kzg_table_limit: int = 2**10
    output: str = "table"
    progress: bool = True

    group_bytes: int = 48
    hash_node_bytes: int = 210_000
    t_group_seconds: float = 0.000665471
    t_hash_seconds: float = 0.00274
    gas_limit: Optional[int] = None
    gas_per_transfer: int = 65_000
    metrics_file: Optional[str] = None

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls,
        init_settings,
        env_settings,
        dotenv_settings,
        file_secret_settings,
    ):
        # Flags and the config file arrive as init kwargs; the environment
        # is never read.
        return (init_settings,)

    def __init__(self, **values):
        super().__init__(**values)

        if self.workers is None:
            self.workers = default_workers()

    @property
    def nu_fraction(self) -> Fraction:
        return Fraction(self.nu)

    @model_validator(mode="after")
    def check_all(self):
        if self.backend not in BACKEND_NAMES:
            raise InvalidParameterException(
                f"Unknown backend {self.backend}, expected one of "
                f"{', '.join(BACKEND_NAMES)}"
            )
        if self.mode not in UPDATE_MODES:
            raise InvalidParameterException(f"Unknown update mode {self.mode}")
        if self.output not in OUTPUT_FORMATS:
            raise InvalidParameterException(f"Unknown output format {self.output}")
        try:
            nu = Fraction(self.nu)
        except (ValueError, ZeroDivisionError):
            raise InvalidParameterException(f"Invalid nu {self.nu}")
        if not 0 <= nu <= 1:
            raise InvalidParameterException(f"nu must be in [0, 1], got {self.nu}")
        if self.c not in VERKLE_DEGREES:
            raise InvalidParameterException(
                f"Verkle degree must be one of {VERKLE_DEGREES}, got {self.c}"
            )

        limit = MAX_LATTICE_N if self.backend == "lattice" else MAX_PAIRING_N
        if self.n > limit:
            raise InvalidParameterException(
                f"N={self.n} exceeds the desk-scale bound {limit} for {self.backend}"
            )
        tree_height(self.n, self.c if self.backend == "verkle" else 2)
        if self.gas_limit is not None:
            if self.gas_limit < 1 or self.gas_per_transfer < 1:
                raise InvalidParameterException("Gas figures must be positive")
        if not 1 <= self.k <= self.n:
            raise InvalidParameterException(
                f"k must be in [1, N={self.n}], got {self.k}"
            )
        if self.users is not None and not 1 <= self.users <= self.n:
            raise InvalidParameterException(f"users must be in [1, {self.n}]")
        if self.workers is not None and self.workers < 1:
            raise InvalidParameterException("workers must be at least 1")
        if self.kzg_table_limit < 1:
            raise InvalidParameterException("kzg_table_limit must be positive")

        return self
