"""
Experiment orchestration: problems, timed solver runs, references and
convergence / omega sweeps producing RunRecords.
"""

import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from discretization.grid import (
    FieldState,
    SpectralGrid,
    build_grid,
    free_propagator,
    l2_distance,
)
from discretization.mass import (
    MassModel,
    preset_constant,
    preset_example1,
    preset_example2,
    preset_free,
)
from integrators.reference import (
    ReferenceMethod,
    ReferenceSpec,
    constant_mass_exact,
    cross_check_reference,
    reference_solution,
)
from integrators.runge_kutta import RungeKuttaIntegrator
from integrators.xi3 import IntegrationError, QuadratureKind, StepperConfig, Xi3Stepper

from .config import Settings
from .monitoring import record_reference, record_run
from .records import RunRecord, attach_slopes

logger = structlog.get_logger(__name__)

DEFAULT_OMEGA = 10.0
CONSTANT_MASS = -1.0


class ProblemKind(str, Enum):
    EXAMPLE1 = "example1"
    EXAMPLE2 = "example2"
    CONSTANT_MASS = "constant_mass"
    FREE = "free"


class MethodId(str, Enum):
    """Method identifiers shared by the CLI and the CSV output."""

    RK2 = "rk2"
    RK4 = "rk4"
    XI3_FILON = "xi3-filon"
    XI3_GL4 = "xi3-gl4"
    XI3_GL6 = "xi3-gl6"
    XI3_GL8 = "xi3-gl8"
    XI3_FINE = "xi3-fine"
    XI3_FILON_MINUS = "xi3-filon-minus"

    @property
    def rk_order(self) -> Optional[int]:
        return {MethodId.RK2: 2, MethodId.RK4: 4}.get(self)

    @property
    def quadrature(self) -> QuadratureKind:
        if self in (MethodId.XI3_GL4, MethodId.XI3_GL6, MethodId.XI3_GL8):
            return QuadratureKind(self.value.split("-")[1])
        return QuadratureKind.FILON

    @property
    def second_derivative_sign(self) -> int:
        return -1 if self is MethodId.XI3_FILON_MINUS else 1


class ExperimentConfig(BaseModel):
    """Validated description of one experiment."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    problem: ProblemKind = ProblemKind.EXAMPLE1
    omega: Optional[float] = Field(default=None, description="Modulation frequency (example1 only)")
    x0: float = -10.0
    x1: float = 10.0
    M: int = 200
    t0: float = 0.0
    T: float = 1.0
    steps_list: List[int] = Field(default_factory=lambda: [20, 40, 80, 160, 320])
    methods: List[MethodId] = Field(default_factory=lambda: [MethodId.XI3_FILON])
    reference: Optional[ReferenceSpec] = None
    cross_check: bool = True
    out_path: Optional[str] = None
    seed: int = 0
    repeats: int = Field(default=3, ge=1)
    real_tolerance: float = Field(default=1e-8, ge=0)
    max_workers: Optional[int] = Field(default=None, ge=1)

    @field_validator("steps_list")
    @classmethod
    def validate_steps(cls, v: List[int]) -> List[int]:
        if not v:
            raise ValueError("steps_list must not be empty")
        if any(k < 1 for k in v):
            raise ValueError("every step count must be positive")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("steps_list must be strictly increasing")
        return v

    @field_validator("methods")
    @classmethod
    def validate_methods(cls, v: List[MethodId]) -> List[MethodId]:
        if not v:
            raise ValueError("methods must not be empty")
        return v

    @field_validator("M")
    @classmethod
    def validate_m(cls, v: int) -> int:
        if v < 4 or v % 2:
            raise ValueError("M must be an even integer >= 4")
        return v

    @model_validator(mode="after")
    def validate_consistency(self) -> "ExperimentConfig":
        if self.omega is not None and self.problem is not ProblemKind.EXAMPLE1:
            raise ValueError(f"omega applies to example1 only, not {self.problem.value}")
        if self.omega is not None and not (np.isfinite(self.omega) and self.omega >= 0):
            raise ValueError("omega must be finite and nonnegative")
        if not self.x1 > self.x0:
            raise ValueError("x1 must exceed x0")
        if not self.T > self.t0:
            raise ValueError("T must exceed t0")
        return self

    @classmethod
    def from_settings(cls, settings: Settings, **fields) -> "ExperimentConfig":
        """Fill grid, run and reference fields from settings; explicit fields win."""
        defaults = dict(
            x0=settings.grid.x0,
            x1=settings.grid.x1,
            M=settings.grid.m,
            t0=settings.run.t0,
            T=settings.run.t_final,
            repeats=settings.run.timing_repeats,
            real_tolerance=settings.run.real_tolerance,
            max_workers=settings.run.worker_count(),
            cross_check=settings.reference.cross_check,
        )
        ref_steps = fields.pop("ref_steps", None)
        defaults.update({k: v for k, v in fields.items() if v is not None})
        cfg = cls(**defaults)
        if cfg.reference is None:
            ref = settings.reference
            steps = ref_steps or ref.steps or ref.refinement_factor * max(cfg.steps_list)
            spec = ReferenceSpec(
                method=ReferenceMethod(ref.method),
                steps=steps,
                cross_check_tolerance=ref.cross_check_tolerance,
                cross_check_steps=ref.cross_check_steps,
                cross_check_max_omega=ref.cross_check_max_omega,
            )
            cfg = cfg.model_copy(update={"reference": spec})
        return cfg

    @property
    def t_span(self) -> Tuple[float, float]:
        return self.t0, self.T

    def worker_count(self) -> int:
        """Cap on parallel reference computations; available cores when unset."""
        return self.max_workers or os.cpu_count() or 1

    def resolved_omega(self) -> float:
        return DEFAULT_OMEGA if self.omega is None else float(self.omega)

    def resolved_reference(self) -> ReferenceSpec:
        if self.reference is not None:
            return self.reference
        return ReferenceSpec(steps=50 * max(self.steps_list))


@dataclass(frozen=True, eq=False)
class Problem:
    """Grid, mass model and initial data of one experiment."""

    kind: ProblemKind
    grid: SpectralGrid
    model: MassModel
    state0: FieldState
    t_span: Tuple[float, float]
    omega: Optional[float] = None

    @property
    def duration(self) -> float:
        return self.t_span[1] - self.t_span[0]

    def exact(self) -> Optional[FieldState]:
        """Closed-form solution at t_span[1] where one exists."""
        if self.kind is ProblemKind.FREE:
            return free_propagator(self.grid, self.duration, self.state0)
        if self.kind is ProblemKind.CONSTANT_MASS:
            return constant_mass_exact(self.grid, CONSTANT_MASS, self.duration, self.state0)
        return None


def gaussian_state(grid: SpectralGrid, t0: float = 0.0) -> FieldState:
    """psi_0 = exp(-x^2 / 2), psi'_0 = 0; treated as periodic on the grid."""
    return FieldState.from_functions(grid, lambda x: np.exp(-0.5 * x**2), t=t0)


def build_problem(cfg: ExperimentConfig, omega: Optional[float] = None) -> Problem:
    """Problem for cfg, with omega overriding cfg.omega for example1."""
    grid = build_grid(cfg.x0, cfg.x1, cfg.M)
    kind = ProblemKind(cfg.problem)
    resolved = None
    if kind is ProblemKind.EXAMPLE1:
        resolved = cfg.resolved_omega() if omega is None else float(omega)
        model = preset_example1(resolved)
    elif kind is ProblemKind.EXAMPLE2:
        model = preset_example2()
    elif kind is ProblemKind.CONSTANT_MASS:
        model = preset_constant(CONSTANT_MASS)
    else:
        model = preset_free()
    return Problem(kind=kind, grid=grid, model=model, state0=gaussian_state(grid, cfg.t0),
                   t_span=cfg.t_span, omega=resolved)


def solve(problem: Problem, method: MethodId, K: int, real_tolerance: float = 1e-8) -> FieldState:
    """Integrate problem with K uniform steps of the given method."""
    method = MethodId(method)
    t0, t_final = problem.t_span
    h = (t_final - t0) / K
    if method.rk_order is not None:
        return RungeKuttaIntegrator(problem.grid, problem.model, method.rk_order, h).run(problem.state0, K)
    cfg = StepperConfig(
        h=h,
        K=K,
        quadrature=method.quadrature,
        real_tolerance=real_tolerance,
        t0=t0,
        second_derivative_sign=method.second_derivative_sign,
    )
    return Xi3Stepper(problem.grid, problem.model, cfg).run(problem.state0)


def timed_solve(problem: Problem, method: MethodId, K: int, repeats: int = 1,
                real_tolerance: float = 1e-8) -> Tuple[FieldState, float]:
    """Solve repeats times; return the last state and the minimum wall time."""
    best = float("inf")
    state = problem.state0
    for _ in range(max(1, repeats)):
        started = time.perf_counter()
        state = solve(problem, method, K, real_tolerance)
        best = min(best, time.perf_counter() - started)
    record_run(MethodId(method).value, K * max(1, repeats), best)
    return state, best


class ReferenceCache:
    """References keyed by (problem, omega, method, steps), computed once per invocation."""

    def __init__(self):
        self._store: Dict[tuple, FieldState] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._store)

    def get(self, problem: Problem, spec: ReferenceSpec, cross_check: bool = True) -> FieldState:
        key = (problem.kind.value, problem.omega, problem.grid.M, problem.t_span,
               spec.method.value, spec.steps)
        with self._lock:
            cached = self._store.get(key)
        if cached is not None:
            return cached
        state = compute_reference(problem, spec, cross_check)
        with self._lock:
            self._store.setdefault(key, state)
        return state


def compute_reference(problem: Problem, spec: ReferenceSpec, cross_check: bool = True) -> FieldState:
    """Exact solution when available, fine-step reference otherwise."""
    exact = problem.exact()
    if exact is not None:
        return exact
    started = time.perf_counter()
    state = reference_solution(problem.grid, problem.model, problem.t_span, spec, problem.state0,
                               cross_check=cross_check)
    record_reference(time.perf_counter() - started)
    return state


def run_convergence(cfg: ExperimentConfig, cache: Optional[ReferenceCache] = None) -> List[RunRecord]:
    """Every (method, K) of cfg scored against one reference, with fitted slopes."""
    problem = build_problem(cfg)
    spec = _checked_reference(cfg, problem)
    cache = cache or ReferenceCache()
    reference = cache.get(problem, spec, cross_check=cfg.cross_check)
    records = _score_runs(cfg, [(problem, reference)])
    return attach_slopes(records)


def run_omega_sweep(cfg: ExperimentConfig, omegas: Sequence[float],
                    cache: Optional[ReferenceCache] = None) -> List[RunRecord]:
    """
    cfg.steps_list crossed with omegas on example1.

    References for the different omegas are computed in parallel; the single
    RK4 cross-check is done once up front since every omega shares the
    low-frequency part of the model. Timed runs are serial.
    """
    if ProblemKind(cfg.problem) is not ProblemKind.EXAMPLE1:
        raise HarnessError(f"An omega sweep needs problem example1, got {cfg.problem.value}")
    if not omegas:
        raise HarnessError("An omega sweep needs at least one omega")
    if any(not (np.isfinite(w) and w >= 0) for w in omegas):
        raise HarnessError(f"omegas must be finite and nonnegative, got {list(omegas)}")

    problems = [build_problem(cfg, omega=w) for w in omegas]
    spec = _checked_reference(cfg, problems[0])
    cache = cache or ReferenceCache()
    if cfg.cross_check and spec.method is ReferenceMethod.XI3_FINE:
        cross_check_reference(problems[0].grid, problems[0].model, cfg.t_span, spec, problems[0].state0)

    workers = min(cfg.worker_count(), len(problems))
    logger.info("omega_sweep_started", omegas=list(omegas), workers=workers, reference_steps=spec.steps)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        references = list(executor.map(lambda p: cache.get(p, spec, cross_check=False), problems))

    records = _score_runs(cfg, list(zip(problems, references)))
    return attach_slopes(records)


def _checked_reference(cfg: ExperimentConfig, problem: Problem) -> ReferenceSpec:
    spec = cfg.resolved_reference()
    if problem.exact() is None:
        spec.validate_for(problem.grid, problem.t_span, finest_steps=max(cfg.steps_list))
    return spec


def _score_runs(cfg: ExperimentConfig, scored: List[Tuple[Problem, FieldState]]) -> List[RunRecord]:
    jobs = [(i, MethodId(method), K)
            for i in range(len(scored)) for method in cfg.methods for K in cfg.steps_list]
    # shuffled run order; records are sorted on output
    order = np.random.default_rng(cfg.seed).permutation(len(jobs))

    records = []
    for idx in order:
        i, method, K = jobs[idx]
        problem, reference = scored[i]
        try:
            state, seconds = timed_solve(problem, method, K, cfg.repeats, cfg.real_tolerance)
            error = l2_distance(state.psi, reference.psi)
        except IntegrationError as e:
            logger.warning("run_failed", method=method.value, K=K, omega=problem.omega, error=str(e))
            error, seconds = float("inf"), 0.0
        if not np.isfinite(error):
            logger.warning("non_finite_error", method=method.value, K=K, omega=problem.omega)
            error = float("inf")
        records.append(RunRecord(
            method=method.value,
            K=K,
            h=problem.duration / K,
            omega_max=problem.model.omega_max,
            error_l2=error,
            runtime_seconds=seconds,
        ))
        logger.info("run_scored", method=method.value, K=K, omega_max=problem.model.omega_max,
                    error_l2=error, seconds=seconds)
    return records


class HarnessError(RuntimeError):
    """Exception raised for an inconsistent experiment."""
    pass
