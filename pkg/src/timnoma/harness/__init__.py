"""Monte-Carlo engine, result tables and command-line entry points."""

from .config import SimConfig, ConfigError, load_config, config_from_mapping
from .engine import run_simulation, run_tdma_leg, simulate_frame
from .results import ResultTable, UserRow, SnrRow
from .export import export_results, read_results, figure_data, write_figure

__all__ = [
    "SimConfig", "ConfigError", "load_config", "config_from_mapping",
    "run_simulation", "run_tdma_leg", "simulate_frame",
    "ResultTable", "UserRow", "SnrRow",
    "export_results", "read_results", "figure_data", "write_figure",
]
