from .config import ConfigError, config_hash, default_run_config, load_run_config
from .report import (
    MONTHS,
    MonthlyEnergyReport,
    read_report_csv,
    round_half_even,
    write_delta_csv,
    write_report_csv,
    yearly_delta,
)
from .benchmark import benchmark, make_controller, run_controller_episode
from .pipeline import PHASES, PhaseError, run_pipeline

__all__ = [
    "ConfigError", "config_hash", "default_run_config", "load_run_config",
    "MONTHS", "MonthlyEnergyReport", "read_report_csv", "round_half_even",
    "write_delta_csv", "write_report_csv", "yearly_delta", "benchmark",
    "make_controller", "run_controller_episode", "PHASES", "PhaseError",
    "run_pipeline",
]
