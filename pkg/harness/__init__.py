"""
Experiment harness: settings, convergence studies, CSV output and the CLI.
"""

from .config import Settings, get_settings
from .experiments import (
    ExperimentConfig,
    HarnessError,
    MethodId,
    Problem,
    ProblemKind,
    ReferenceCache,
    build_problem,
    run_convergence,
    run_omega_sweep,
    solve,
)
from .records import RecordError, RunRecord, attach_slopes, emit_csv, fit_slope, read_records

__all__ = [
    "ExperimentConfig",
    "HarnessError",
    "MethodId",
    "Problem",
    "ProblemKind",
    "RecordError",
    "ReferenceCache",
    "RunRecord",
    "Settings",
    "attach_slopes",
    "build_problem",
    "emit_csv",
    "fit_slope",
    "get_settings",
    "read_records",
    "run_convergence",
    "run_omega_sweep",
    "solve",
]
