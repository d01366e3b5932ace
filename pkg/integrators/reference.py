"""
Reference solutions: fine-step runs of the integrators and the closed-form
solution for a constant mass.
"""

import time
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
import structlog

from discretization.grid import FieldState, SpectralGrid, l2_distance
from discretization.mass import MassModel, MassModelError

from .runge_kutta import TABLEAUS, RungeKuttaIntegrator
from .xi3 import StepperConfig, Xi3Stepper

logger = structlog.get_logger(__name__)

# the reference step must be this much finer than the finest step under study
MIN_REFINEMENT = 50


class ReferenceMethod(str, Enum):
    RK2 = "rk2"
    RK4 = "rk4"
    XI3_FINE = "xi3_fine"

    @property
    def rk_order(self) -> Optional[int]:
        return {ReferenceMethod.RK2: 2, ReferenceMethod.RK4: 4}.get(self)


@dataclass(frozen=True)
class ReferenceSpec:
    """
    How to compute a reference.

    A xi3_fine reference is cross-checked against RK4 on the terms with
    |omega_n| <= cross_check_max_omega, using cross_check_steps steps
    (defaults to steps) for both runs.
    """

    method: ReferenceMethod = ReferenceMethod.XI3_FINE
    steps: int = 100_000
    cross_check_tolerance: float = 1e-8
    cross_check_steps: Optional[int] = None
    cross_check_max_omega: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "method", ReferenceMethod(self.method))
        if int(self.steps) != self.steps or self.steps < 1:
            raise ReferenceSpecError(f"steps must be a positive integer, got {self.steps}")
        if self.cross_check_steps is not None and self.cross_check_steps < 1:
            raise ReferenceSpecError(f"cross_check_steps must be positive, got {self.cross_check_steps}")
        if not self.cross_check_tolerance >= 0:
            raise ReferenceSpecError(f"cross_check_tolerance must be >= 0, got {self.cross_check_tolerance}")
        object.__setattr__(self, "steps", int(self.steps))

    def step_size(self, t_span: Tuple[float, float]) -> float:
        return (t_span[1] - t_span[0]) / self.steps

    def validate_for(self, grid: SpectralGrid, t_span: Tuple[float, float],
                     finest_steps: Optional[int] = None) -> "ReferenceSpec":
        """
        Check the reference against a grid and the finest run it will score.

        Raises:
            ReferenceSpecError: if an RK reference is above its stability limit
                or the reference is less than MIN_REFINEMENT times finer
        """
        h = self.step_size(t_span)
        order = self.method.rk_order
        if order is not None:
            limit = TABLEAUS[order].stability / grid.g_max
            if h > limit:
                raise ReferenceSpecError(
                    f"{self.method.value} reference step {h:.3g} exceeds the stability limit {limit:.3g}"
                )
        if finest_steps is not None and self.steps < MIN_REFINEMENT * finest_steps:
            raise ReferenceSpecError(
                f"Reference with {self.steps} steps is not {MIN_REFINEMENT}x finer than K={finest_steps}"
            )
        return self


def constant_mass_exact(grid: SpectralGrid, m0: float, t: float, state0: FieldState) -> FieldState:
    """
    Exact solution for m(x, t) = m0 after elapsed time t.

    Each mode oscillates with frequency sqrt(lambda_k), lambda_k = g_k^2 - m0:

        psi_k(t)  =  cos(t w) psi_k + t sinc(t w) psi'_k
        psi'_k(t) = -w sin(t w) psi_k + cos(t w) psi'_k

    Raises:
        ConstantMassError: if lambda_k < 0 for some mode
    """
    state0.check_on(grid)
    m0 = float(np.real(m0))
    lam = grid.symbols_g**2 - m0
    if np.any(lam < 0):
        raise ConstantMassError(
            f"m0={m0} gives a growing mode (lambda_min={lam.min():.3g}); need g_k^2 - m0 >= 0"
        )
    w = np.sqrt(lam)
    tw = t * w
    cos, sin = np.cos(tw), np.sin(tw)
    sinc_scaled = t * np.sinc(tw / np.pi)

    psi_hat = grid.forward(state0.psi)
    dpsi_hat = grid.forward(state0.dpsi)
    return FieldState(
        psi=grid.inverse(cos * psi_hat + sinc_scaled * dpsi_hat),
        dpsi=grid.inverse(-w * sin * psi_hat + cos * dpsi_hat),
        t=state0.t + t,
    )


def reference_solution(grid: SpectralGrid, model: MassModel, t_span: Tuple[float, float],
                       spec: ReferenceSpec, state0: FieldState, cross_check: bool = True) -> FieldState:
    """
    Fine-step reference at t_span[1].

    Raises:
        ReferenceCheckError: if the xi3_fine cross-check disagrees by more
            than spec.cross_check_tolerance
    """
    t0, t_final = t_span
    if not t_final > t0:
        raise ReferenceSpecError(f"Need t_final > t0, got {t_span}")

    started = time.perf_counter()
    result = _integrate(grid, model, t_span, spec.method, spec.steps, state0)
    logger.info("reference_computed", method=spec.method.value, model=model.name,
                steps=spec.steps, seconds=time.perf_counter() - started)

    if cross_check and spec.method is ReferenceMethod.XI3_FINE:
        cross_check_reference(grid, model, t_span, spec, state0)
    return result


def cross_check_reference(grid: SpectralGrid, model: MassModel, t_span: Tuple[float, float],
                          spec: ReferenceSpec, state0: FieldState) -> Optional[float]:
    """
    Compare xi3_fine against RK4 on the low-frequency part of the model.

    Returns the l2 disagreement, or None when no term is slow enough to check.
    """
    try:
        low = model.truncated(spec.cross_check_max_omega)
    except MassModelError:
        logger.warning("cross_check_skipped", model=model.name, max_omega=spec.cross_check_max_omega)
        return None

    steps = spec.cross_check_steps or spec.steps
    fine = _integrate(grid, low, t_span, ReferenceMethod.XI3_FINE, steps, state0)
    rk4 = _integrate(grid, low, t_span, ReferenceMethod.RK4, steps, state0)
    disagreement = l2_distance(fine.psi, rk4.psi)
    logger.info("cross_check_completed", model=low.name, steps=steps, disagreement=disagreement,
                tolerance=spec.cross_check_tolerance)
    if not disagreement <= spec.cross_check_tolerance:
        raise ReferenceCheckError(
            f"xi3_fine and rk4 disagree by {disagreement:.3e} on '{low.name}' "
            f"(tolerance {spec.cross_check_tolerance:.1e}, {steps} steps)"
        )
    return disagreement


def _integrate(grid: SpectralGrid, model: MassModel, t_span: Tuple[float, float],
               method: ReferenceMethod, steps: int, state0: FieldState) -> FieldState:
    t0, t_final = t_span
    h = (t_final - t0) / steps
    if method is ReferenceMethod.XI3_FINE:
        cfg = StepperConfig(h=h, K=steps, t0=t0)
        return Xi3Stepper(grid, model, cfg).run(state0)
    return RungeKuttaIntegrator(grid, model, method.rk_order, h).run(state0, steps)


class ReferenceSpecError(ValueError):
    """Exception raised for a reference that is unstable or not fine enough."""
    pass


class ReferenceCheckError(RuntimeError):
    """Exception raised when the fine-step reference fails its RK4 cross-check."""
    pass


class ConstantMassError(ValueError):
    """Exception raised when the constant-mass oracle has a growing mode."""
    pass
