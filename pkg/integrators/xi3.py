"""
Third-order exponential integrator for psi'' = Delta psi + m(x, t) psi.

Each step is the free flight R(h) of (psi_k, psi'_k) plus the two Duhamel
integrals of the source m psi, with psi on [t_k, t_k + h] replaced by the
quadratic Taylor polynomial

    psi_k + tau psi'_k + tau^2 / (2h) (psi'_k - psi'_{k-1})

The first step has no psi'_{-1}; it uses tau^2 / 2 psi''_0 with psi''_0 taken
from the equation itself.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np
import structlog

from discretization.grid import FieldState, SpectralGrid
from discretization.mass import EnvelopeSampler, MassModel

from .quadrature import DuhamelQuadrature, FilonQuadrature, GaussLegendreQuadrature

logger = structlog.get_logger(__name__)

Observer = Callable[[int, FieldState], None]


class QuadratureKind(str, Enum):
    """Quadrature used for the step integrals."""

    FILON = "filon"
    GL4 = "gl4"
    GL6 = "gl6"
    GL8 = "gl8"

    @property
    def order(self) -> Optional[int]:
        """Gauss-Legendre order, None for Filon."""
        return None if self is QuadratureKind.FILON else int(self.value[2:])


@dataclass(frozen=True)
class StepperConfig:
    """
    Run parameters. Time levels are t_k = t0 + k h, k = 0..K.

    second_derivative_sign selects psi''_0 = Delta psi_0 + sign * m(t0) psi_0;
    +1 is consistent with the equation, -1 is kept for the sign control runs.
    """

    h: float
    K: int
    quadrature: QuadratureKind = QuadratureKind.FILON
    real_tolerance: float = 1e-8
    t0: float = 0.0
    second_derivative_sign: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.h) and self.h > 0):
            raise IntegrationError(f"Step h must be positive and finite, got {self.h}")
        if int(self.K) != self.K or self.K < 0:
            raise IntegrationError(f"Step count K must be a nonnegative integer, got {self.K}")
        if self.real_tolerance < 0:
            raise IntegrationError(f"real_tolerance must be nonnegative, got {self.real_tolerance}")
        if self.second_derivative_sign not in (1, -1):
            raise IntegrationError(
                f"second_derivative_sign must be +1 or -1, got {self.second_derivative_sign}"
            )
        object.__setattr__(self, "K", int(self.K))
        object.__setattr__(self, "quadrature", QuadratureKind(self.quadrature))

    @classmethod
    def over_interval(cls, t0: float, t_final: float, K: int, **kwargs) -> "StepperConfig":
        """K uniform steps covering [t0, t_final]."""
        if K < 1:
            raise IntegrationError(f"Need at least one step to cover an interval, got K={K}")
        if not t_final > t0:
            raise IntegrationError(f"Need t_final > t0, got t0={t0}, t_final={t_final}")
        return cls(h=(t_final - t0) / K, K=K, t0=t0, **kwargs)

    @property
    def t_final(self) -> float:
        return self.time_at(self.K)

    def time_at(self, k: int) -> float:
        return self.t0 + k * self.h


@dataclass(frozen=True, eq=False)
class StepperState:
    """State at t_k plus psi'_{k-1}, which is present exactly when k >= 1."""

    current: FieldState
    prev_dpsi: Optional[np.ndarray]
    k: int

    def __post_init__(self):
        if (self.prev_dpsi is None) != (self.k == 0):
            raise IntegrationError(f"prev_dpsi must be present exactly when k >= 1 (k={self.k})")

    @classmethod
    def initial(cls, state0: FieldState) -> "StepperState":
        return cls(current=state0, prev_dpsi=None, k=0)


def second_derivative_initial(grid: SpectralGrid, model: MassModel, state0: FieldState,
                              sign: int = 1) -> np.ndarray:
    """psi''_0 = Delta psi_0 + sign * m(t0) psi_0, with Delta = -G^2 applied spectrally."""
    state0.check_on(grid)
    return grid.laplacian(state0.psi) + sign * model.evaluate(grid, state0.t) * state0.psi


class Xi3Stepper:
    """
    Stepper bound to one grid, model and configuration.

    Operator symbols at h, moments and the envelope sampler are built once and
    reused by every step of the run.
    """

    def __init__(self, grid: SpectralGrid, model: MassModel, cfg: StepperConfig,
                 quadrature: Optional[DuhamelQuadrature] = None):
        self.grid = grid
        self.model = model
        self.cfg = cfg
        self.quadrature = quadrature or build_quadrature(grid, model, cfg)
        self._symbols = grid.operator_symbols(cfg.h)
        self._drift_reported = False
        self.logger = logger.bind(model=model.name, quadrature=self.quadrature.name, h=cfg.h)

    def step_first(self, state0: FieldState) -> StepperState:
        """Step 0 -> 1 using w3 = psi''_0 with tau^2 weight 1/2."""
        self._check_start(state0)
        w3 = second_derivative_initial(self.grid, self.model, state0, self.cfg.second_derivative_sign)
        new = self._advance(state0, w3, first_step=True, k_next=1)
        return StepperState(current=new, prev_dpsi=state0.dpsi, k=1)

    def step(self, s: StepperState) -> StepperState:
        """Step k -> k + 1 using w3 = psi'_k - psi'_{k-1} with tau^2 weight 1/(2h)."""
        if s.k < 1 or s.prev_dpsi is None:
            raise IntegrationError("step() needs k >= 1; use step_first() from the initial state")
        w3 = s.current.dpsi - s.prev_dpsi
        new = self._advance(s.current, w3, first_step=False, k_next=s.k + 1)
        return StepperState(current=new, prev_dpsi=s.current.dpsi, k=s.k + 1)

    def advance(self, s: StepperState, n: int, observer: Optional[Observer] = None) -> StepperState:
        """Take n steps from s, starting with step_first when s is at k = 0."""
        for _ in range(int(n)):
            s = self.step_first(s.current) if s.k == 0 else self.step(s)
            self._check_state(s)
            if observer is not None:
                observer(s.k, s.current)
        return s

    def run(self, state0: FieldState, observer: Optional[Observer] = None) -> FieldState:
        """
        Integrate K steps from state0 and return the state at t0 + K h.

        The observer, if given, is called as observer(k, state) for k = 1..K.
        """
        self._check_start(state0)
        self.logger.info("run_started", steps=self.cfg.K, M=self.grid.M)
        final = self.advance(StepperState.initial(state0), self.cfg.K, observer)
        self.logger.info("run_completed", steps=self.cfg.K, t_final=final.current.t,
                         imag_drift=final.current.imag_drift())
        return final.current

    def _advance(self, state: FieldState, w3: np.ndarray, first_step: bool, k_next: int) -> FieldState:
        grid, sym = self.grid, self._symbols
        psi_hat = grid.forward(state.psi)
        dpsi_hat = grid.forward(state.dpsi)
        duhamel = self.quadrature.integrals(state, w3, first_step)

        psi = grid.inverse(sym.cos * psi_hat + sym.sinc_scaled * dpsi_hat + duhamel.sin_hat)
        dpsi = grid.inverse(-sym.g_sin * psi_hat + sym.cos * dpsi_hat + duhamel.cos_hat)
        if duhamel.sin_phys is not None:
            psi += duhamel.sin_phys
        if duhamel.cos_phys is not None:
            dpsi += duhamel.cos_phys
        return FieldState(psi=psi, dpsi=dpsi, t=self.cfg.time_at(k_next))

    def _check_start(self, state0: FieldState) -> None:
        state0.check_on(self.grid)
        if abs(state0.t - self.cfg.t0) > 1e-12 * max(1.0, abs(self.cfg.t0)):
            raise IntegrationError(f"Initial state is at t={state0.t}, configuration starts at t0={self.cfg.t0}")

    def _check_state(self, s: StepperState) -> None:
        if not s.current.is_finite():
            self.logger.error("non_finite_state", step=s.k, t=s.current.t)
            raise IntegrationError(f"Non-finite values in the state at step {s.k} (t={s.current.t})")
        if self.model.real_valued and not self._drift_reported:
            drift = s.current.imag_drift()
            if drift > self.cfg.real_tolerance:
                self._drift_reported = True
                self.logger.warning("imaginary_drift", step=s.k, drift=drift,
                                    tolerance=self.cfg.real_tolerance)


def build_quadrature(grid: SpectralGrid, model: MassModel, cfg: StepperConfig,
                     sampler: Optional[EnvelopeSampler] = None) -> DuhamelQuadrature:
    """Quadrature for the configured kind at step cfg.h."""
    kind = QuadratureKind(cfg.quadrature)
    if kind is QuadratureKind.FILON:
        return FilonQuadrature(grid, model, cfg.h, sampler=sampler)
    return GaussLegendreQuadrature(grid, model, cfg.h, order=kind.order, sampler=sampler)


def step_first(grid: SpectralGrid, model: MassModel, cfg: StepperConfig, state0: FieldState) -> StepperState:
    return Xi3Stepper(grid, model, cfg).step_first(state0)


def step(grid: SpectralGrid, model: MassModel, cfg: StepperConfig, s: StepperState) -> StepperState:
    return Xi3Stepper(grid, model, cfg).step(s)


def run(grid: SpectralGrid, model: MassModel, cfg: StepperConfig, state0: FieldState,
        observer: Optional[Observer] = None) -> FieldState:
    """Integrate cfg.K steps; see Xi3Stepper.run."""
    return Xi3Stepper(grid, model, cfg).run(state0, observer)


class IntegrationError(RuntimeError):
    """Exception raised for invalid stepper input or a state that stopped being finite."""
    pass
