"""Config files, Monte Carlo sweeps, CSV output and the command line."""
from .config_io import ExperimentSpec, Sweep, load_config, parse_text, spec_from_mapping
from .csv_io import HEADER, format_csv, read_csv, write_csv
from .experiment import ResultRow, TrialError, run_experiment, run_trial, run_trials

__all__ = [
    "ExperimentSpec", "Sweep", "load_config", "parse_text", "spec_from_mapping",
    "HEADER", "format_csv", "read_csv", "write_csv",
    "ResultRow", "TrialError", "run_experiment", "run_trial", "run_trials",
]
