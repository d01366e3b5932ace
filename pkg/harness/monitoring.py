"""
Structured logging and Prometheus metrics for the harness.
"""

import logging
import sys
from pathlib import Path
from typing import Union

import structlog
from prometheus_client import CollectorRegistry, Counter, Histogram, write_to_textfile

REGISTRY = CollectorRegistry(auto_describe=True)

SOLVER_RUNS = Counter(
    "kgfilon_solver_runs_total",
    "Completed solver runs",
    ["method"],
    registry=REGISTRY,
)

SOLVER_STEPS = Counter(
    "kgfilon_solver_steps_total",
    "Time steps taken by solver runs",
    ["method"],
    registry=REGISTRY,
)

SOLVER_RUN_SECONDS = Histogram(
    "kgfilon_solver_run_seconds",
    "Wall time of one solver run in seconds",
    ["method"],
    buckets=(0.001, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 60.0, 300.0),
    registry=REGISTRY,
)

REFERENCE_SECONDS = Histogram(
    "kgfilon_reference_seconds",
    "Wall time of one reference computation in seconds",
    buckets=(0.1, 1.0, 5.0, 10.0, 60.0, 300.0, 1800.0),
    registry=REGISTRY,
)


def configure_logging(level: str = "INFO", json: bool = False) -> None:
    """Configure structlog once per process; everything goes to stderr."""
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, level.upper(), logging.INFO),
        force=True,
    )
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            structlog.processors.JSONRenderer() if json else structlog.dev.ConsoleRenderer(colors=False),
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )


def record_run(method: str, steps: int, seconds: float) -> None:
    SOLVER_RUNS.labels(method=method).inc()
    SOLVER_STEPS.labels(method=method).inc(steps)
    SOLVER_RUN_SECONDS.labels(method=method).observe(seconds)


def record_reference(seconds: float) -> None:
    REFERENCE_SECONDS.observe(seconds)


def write_metrics(path: Union[str, Path]) -> Path:
    """Write the registry in Prometheus text format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_to_textfile(str(path), REGISTRY)
    return path
