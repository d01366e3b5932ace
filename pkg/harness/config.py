"""
Configuration management for the kgfilon harness.
Settings come from defaults, a .env file and environment variables
(nested groups use "__", e.g. RUN__MAX_WORKERS=4).
"""

import os
from functools import lru_cache
from typing import Literal, Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class GridSettings(BaseSettings):
    """Spatial grid of the experiments."""

    x0: float = Field(default=-10.0, description="Left end of the periodic interval")
    x1: float = Field(default=10.0, description="Right end of the periodic interval (excluded)")
    m: int = Field(default=200, description="Number of collocation nodes (even)")

    model_config = SettingsConfigDict(env_prefix="GRID_", extra="ignore")

    @field_validator("m")
    @classmethod
    def validate_m(cls, v: int) -> int:
        if v < 4 or v % 2:
            raise ValueError("m must be an even integer >= 4")
        return v


class RunSettings(BaseSettings):
    """Time interval, diagnostics and execution."""

    t0: float = Field(default=0.0, description="Initial time")
    t_final: float = Field(default=1.0, description="Final time")
    real_tolerance: float = Field(default=1e-8, description="Allowed imaginary drift for real problems")
    timing_repeats: int = Field(default=3, description="Repetitions per timed run (minimum reported)")
    max_workers: Optional[int] = Field(
        default=None,
        description="Cap on parallel reference computations (default: available cores)",
    )

    model_config = SettingsConfigDict(env_prefix="RUN_", extra="ignore")

    @field_validator("timing_repeats")
    @classmethod
    def validate_repeats(cls, v: int) -> int:
        if v < 1:
            raise ValueError("timing_repeats must be >= 1")
        return v

    @field_validator("max_workers")
    @classmethod
    def validate_workers(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 1:
            raise ValueError("max_workers must be >= 1")
        return v

    def worker_count(self) -> int:
        return self.max_workers or os.cpu_count() or 1


class ReferenceSettings(BaseSettings):
    """Reference solutions used to score runs."""

    method: Literal["rk2", "rk4", "xi3_fine"] = Field(default="xi3_fine", description="Reference method")
    steps: Optional[int] = Field(
        default=None,
        description="Reference step count (default: refinement_factor x finest K)",
    )
    refinement_factor: int = Field(default=50, description="Reference refinement over the finest K")
    cross_check: bool = Field(default=True, description="Cross-check xi3_fine against RK4")
    cross_check_tolerance: float = Field(default=1e-8, description="Allowed cross-check disagreement")
    cross_check_steps: Optional[int] = Field(
        default=None,
        description="Step count of the cross-check runs (default: reference steps)",
    )
    cross_check_max_omega: float = Field(
        default=10.0,
        description="Only terms with |omega| up to this enter the cross-check",
    )

    model_config = SettingsConfigDict(env_prefix="REFERENCE_", extra="ignore")

    @field_validator("refinement_factor")
    @classmethod
    def validate_refinement(cls, v: int) -> int:
        if v < 50:
            raise ValueError("refinement_factor must be at least 50")
        return v


class MonitoringSettings(BaseSettings):
    """Logging and metrics."""

    log_level: str = Field(default="INFO", description="Logging level")
    log_json: bool = Field(default=False, description="Render logs as JSON lines")
    metrics_path: Optional[str] = Field(
        default=None,
        description="Write Prometheus metrics in text format to this file after each command",
    )

    model_config = SettingsConfigDict(env_prefix="MONITORING_", extra="ignore")

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        allowed = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in allowed:
            raise ValueError(f"log_level must be one of: {allowed}")
        return v.upper()


class Settings(BaseSettings):
    """Harness settings combining all groups."""

    grid: GridSettings = Field(default_factory=GridSettings)
    run: RunSettings = Field(default_factory=RunSettings)
    reference: ReferenceSettings = Field(default_factory=ReferenceSettings)
    monitoring: MonitoringSettings = Field(default_factory=MonitoringSettings)

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_nested_delimiter="__",
        case_sensitive=False,
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """Get cached harness settings."""
    return Settings()
