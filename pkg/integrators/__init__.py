"""
Time integrators: the exponential Filon stepper, Runge-Kutta baselines and references.
"""

from .reference import (
    ConstantMassError,
    ReferenceCheckError,
    ReferenceMethod,
    ReferenceSpec,
    ReferenceSpecError,
    constant_mass_exact,
    cross_check_reference,
    reference_solution,
)
from .runge_kutta import ButcherTableau, RungeKuttaError, RungeKuttaIntegrator, rk_step
from .xi3 import (
    IntegrationError,
    QuadratureKind,
    StepperConfig,
    StepperState,
    Xi3Stepper,
    build_quadrature,
    run,
    second_derivative_initial,
    step,
    step_first,
)

__all__ = [
    "ButcherTableau",
    "ConstantMassError",
    "IntegrationError",
    "QuadratureKind",
    "ReferenceCheckError",
    "ReferenceMethod",
    "ReferenceSpec",
    "ReferenceSpecError",
    "RungeKuttaError",
    "RungeKuttaIntegrator",
    "StepperConfig",
    "StepperState",
    "Xi3Stepper",
    "build_quadrature",
    "constant_mass_exact",
    "cross_check_reference",
    "reference_solution",
    "rk_step",
    "run",
    "second_derivative_initial",
    "step",
    "step_first",
]
