"""Experiment runners, their configuration and reports."""
from .config import DEFAULTS, EXPERIMENTS, ConfigError, ExperimentConfig, dump_config, load_config, parse_config_text
from .easy import run_easy_direction
from .exact import run_certificate, run_counterexample, run_model_conversions, run_partial_adaptive
from .lower_bounds import run_degree_lb, run_support_size
from .report import Check, Report, rederive

RUNNERS = {
    "counterexample": run_counterexample,
    "easy-direction": run_easy_direction,
    "support-size": run_support_size,
    "degree-lb": run_degree_lb,
    "conversions": run_model_conversions,
    "partial-adaptive": run_partial_adaptive,
    "certify": run_certificate,
}


def run(cfg: ExperimentConfig) -> Report:
    return RUNNERS[cfg.experiment](cfg)


__all__ = [
    "DEFAULTS", "EXPERIMENTS", "RUNNERS", "Check", "ConfigError", "ExperimentConfig", "Report",
    "dump_config", "load_config", "parse_config_text", "rederive", "run",
    "run_certificate", "run_counterexample", "run_degree_lb", "run_easy_direction",
    "run_model_conversions", "run_partial_adaptive", "run_support_size",
]
