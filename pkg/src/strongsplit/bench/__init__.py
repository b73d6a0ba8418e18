"""Configuration-driven experiment harness."""
from .config import ConfigError, ProblemSpec, parse_config, parse_text
from .runner import (COLUMNS, ExperimentResult, RateFloorError, csv_text, emit_csv,
                     fit_loglog_slope, fit_rate, probe, read_csv, run)

__all__ = ["COLUMNS", "ConfigError", "ProblemSpec", "parse_config", "parse_text",
           "ExperimentResult", "RateFloorError", "csv_text", "emit_csv", "fit_loglog_slope",
           "fit_rate", "probe", "read_csv", "run"]
