"""
Explicit Runge-Kutta baselines on the first-order system

    d/dt (psi, psi') = (psi', Delta psi + m(t) psi)

with Delta applied spectrally. They are accurate only while h resolves both
the largest symbol of the grid and the largest frequency of the mass.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np
import structlog

from discretization.grid import FieldState, SpectralGrid
from discretization.mass import EnvelopeSampler, MassModel

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class ButcherTableau:
    """
    Explicit tableau (strictly lower-triangular a) with its stability factor:
    the step is stable on the spectrum of the free system for h g_max <= stability.
    """

    name: str
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    stability: float

    @property
    def stages(self) -> int:
        return len(self.b)


MIDPOINT = ButcherTableau(
    name="rk2",
    a=np.array([[0.0, 0.0], [0.5, 0.0]]),
    b=np.array([0.0, 1.0]),
    c=np.array([0.0, 0.5]),
    # no imaginary-axis interval; the amplification exceeds 1 by O((h g)^4)
    stability=1.0,
)

CLASSICAL_RK4 = ButcherTableau(
    name="rk4",
    a=np.array([
        [0.0, 0.0, 0.0, 0.0],
        [0.5, 0.0, 0.0, 0.0],
        [0.0, 0.5, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
    ]),
    b=np.array([1.0, 2.0, 2.0, 1.0]) / 6.0,
    c=np.array([0.0, 0.5, 0.5, 1.0]),
    stability=2.0 * np.sqrt(2.0),
)

TABLEAUS: Dict[int, ButcherTableau] = {2: MIDPOINT, 4: CLASSICAL_RK4}


class RungeKuttaIntegrator:
    """Fixed-step explicit Runge-Kutta integrator of order 2 or 4."""

    def __init__(self, grid: SpectralGrid, model: MassModel, order: int, h: float,
                 sampler: Optional[EnvelopeSampler] = None):
        if order not in TABLEAUS:
            raise RungeKuttaError(f"Unsupported Runge-Kutta order {order} (supported: {sorted(TABLEAUS)})")
        if not (np.isfinite(h) and h > 0):
            raise RungeKuttaError(f"Step h must be positive and finite, got {h}")
        self.grid = grid
        self.model = model
        self.order = order
        self.h = float(h)
        self.tableau = TABLEAUS[order]
        self.sampler = sampler or EnvelopeSampler(model, grid)
        self._omegas = model.omegas
        self._lap = -(grid.symbols_g**2)
        self.stable = self.check_stability()

    @property
    def stability_limit(self) -> float:
        """Largest stable step c / g_max for the free system on this grid."""
        return self.tableau.stability / self.grid.g_max

    def check_stability(self) -> bool:
        """Warn when h exceeds the explicit stability limit; never raises."""
        limit = self.stability_limit
        if self.h > limit:
            logger.warning("rk_stability_limit_exceeded", method=self.tableau.name,
                           h=self.h, limit=limit, g_max=self.grid.g_max)
            return False
        return True

    def mass(self, t: float) -> np.ndarray:
        samples = self.sampler.sample(t)
        return np.exp(1j * self._omegas * t) @ samples.values

    def rhs(self, t: float, psi: np.ndarray, dpsi: np.ndarray):
        grid = self.grid
        accel = grid.inverse(self._lap * grid.forward(psi)) + self.mass(t) * psi
        return dpsi, accel

    def step(self, state: FieldState, t_next: Optional[float] = None) -> FieldState:
        """One step from state.t; t_next overrides state.t + h for the returned state."""
        state.check_on(self.grid)
        tab, h, t = self.tableau, self.h, state.t
        k_psi, k_dpsi = [], []
        for i in range(tab.stages):
            psi, dpsi = state.psi, state.dpsi
            for j in range(i):
                if tab.a[i, j]:
                    psi = psi + (h * tab.a[i, j]) * k_psi[j]
                    dpsi = dpsi + (h * tab.a[i, j]) * k_dpsi[j]
            kp, kd = self.rhs(t + tab.c[i] * h, psi, dpsi)
            k_psi.append(kp)
            k_dpsi.append(kd)

        psi, dpsi = state.psi.copy(), state.dpsi.copy()
        for weight, kp, kd in zip(tab.b, k_psi, k_dpsi):
            if weight:
                psi += (h * weight) * kp
                dpsi += (h * weight) * kd
        return FieldState(psi=psi, dpsi=dpsi, t=t + h if t_next is None else t_next)

    def run(self, state0: FieldState, K: int,
            observer: Optional[Callable[[int, FieldState], None]] = None) -> FieldState:
        """K steps from state0; time levels are state0.t + k h."""
        t0 = state0.t
        state = state0
        logger.info("run_started", method=self.tableau.name, steps=K, h=self.h, M=self.grid.M)
        for k in range(1, int(K) + 1):
            state = self.step(state, t_next=t0 + k * self.h)
            if not state.is_finite():
                # returned as is; callers score it
                logger.warning("rk_non_finite_state", method=self.tableau.name, step=k)
                return state
            if observer is not None:
                observer(k, state)
        logger.info("run_completed", method=self.tableau.name, steps=K, t_final=state.t)
        return state


def rk_step(order: int, grid: SpectralGrid, model: MassModel, state: FieldState, h: float) -> FieldState:
    """One classical Runge-Kutta step of the given order (2 or 4)."""
    return RungeKuttaIntegrator(grid, model, order, h).step(state)


class RungeKuttaError(ValueError):
    """Exception raised for an unsupported order or step."""
    pass
