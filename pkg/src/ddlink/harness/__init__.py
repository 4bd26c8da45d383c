"""Scenario configs, BER sweeps, complexity accounting and the CLI."""

from .complexity import ComplexityReport, count_ops_report
from .config import Scenario, SensingConfig, default_scenario, load_scenario, parse_scenario
from .results import BerRow, BerTable, emit_csv, read_csv
from .sweep import run_ber_sweep, run_cell, run_sensing_trials, splitmix64

__all__ = [
    "BerRow", "BerTable", "ComplexityReport", "Scenario", "SensingConfig", "count_ops_report",
    "default_scenario", "emit_csv", "load_scenario", "parse_scenario", "read_csv", "run_ber_sweep",
    "run_cell", "run_sensing_trials", "splitmix64",
]
