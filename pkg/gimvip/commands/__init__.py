__all__ = [
    "define_validate_command",
    "define_simulate_command",
    "define_solve_command",
    "define_certify_command",
    "define_bench_command",
    "define_plot_command",
]

from .bench import define_bench_command
from .certify import define_certify_command
from .plot import define_plot_command
from .simulate import define_simulate_command
from .solve import define_solve_command
from .validate import define_validate_command
