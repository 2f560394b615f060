"""Experiment orchestration: tuning, evaluation, multi-agent runs and plot data."""
from .config import ExperimentConfig, format_config, parse_config, parse_grid_values, read_config
from .evaluation import RunMetrics, TuneResult, check_policy, default_grid, evaluate, run_once, tune_baseline
from .experiment import emit_plotdata, experiment_metric_files, instance_sets, rank_agents, run_experiment

__all__ = [
    "ExperimentConfig",
    "RunMetrics",
    "TuneResult",
    "check_policy",
    "default_grid",
    "emit_plotdata",
    "evaluate",
    "experiment_metric_files",
    "format_config",
    "instance_sets",
    "parse_config",
    "parse_grid_values",
    "rank_agents",
    "read_config",
    "run_experiment",
    "run_once",
    "tune_baseline",
]
