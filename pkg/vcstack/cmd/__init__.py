from .analytic import setup_analytic_cmd
from .bench import setup_bench_cmd
from .e2e import setup_e2e_cmd
from .updinfo import setup_updinfo_cmd
from .version import setup_version_cmd

__all__ = [
    "setup_analytic_cmd",
    "setup_bench_cmd",
    "setup_e2e_cmd",
    "setup_updinfo_cmd",
    "setup_version_cmd",
]
