"""
Base interface for quadratures of the two Duhamel integrals of one time step.

For a step from t_k with state (psi_k, psi'_k) and third Taylor vector w3 the
integrals are

    S = int_0^h G^{-1} sin((h - tau) G) m(t_k + tau) [psi_k + tau psi'_k + c tau^2 w3] dtau
    C = int_0^h cos((h - tau) G)        m(t_k + tau) [psi_k + tau psi'_k + c tau^2 w3] dtau

with c = 1/(2h) on ordinary steps (w3 = psi'_k - psi'_{k-1}) and c = 1/2 on
the first step (w3 = psi''_0).
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np
import structlog

from discretization.grid import FieldState, SpectralGrid
from discretization.mass import EnvelopeSampler, MassModel

logger = structlog.get_logger(__name__)


def taylor_weight(h: float, first_step: bool) -> float:
    """Coefficient c of tau^2 in the Taylor polynomial."""
    return 0.5 if first_step else 0.5 / h


@dataclass(frozen=True, eq=False)
class DuhamelIntegrals:
    """
    Both integrals of one step, split into a part still in transform space and
    a transform-free physical part: S = inverse(sin_hat) + sin_phys.
    """

    sin_hat: np.ndarray
    cos_hat: np.ndarray
    sin_phys: Optional[np.ndarray] = None
    cos_phys: Optional[np.ndarray] = None

    def sin(self, grid: SpectralGrid) -> np.ndarray:
        return _combine(grid, self.sin_hat, self.sin_phys)

    def cos(self, grid: SpectralGrid) -> np.ndarray:
        return _combine(grid, self.cos_hat, self.cos_phys)


class DuhamelQuadrature(ABC):
    """Base class for quadratures of the step integrals."""

    def __init__(self, grid: SpectralGrid, model: MassModel, h: float,
                 sampler: Optional[EnvelopeSampler] = None):
        if not h > 0:
            raise QuadratureError(f"Step h must be positive, got {h}")
        self.grid = grid
        self.model = model
        self.h = float(h)
        self.sampler = sampler or EnvelopeSampler(model, grid)
        self.logger = structlog.get_logger(self.__class__.__name__)

    @property
    @abstractmethod
    def name(self) -> str:
        """Return the quadrature name."""
        pass

    @abstractmethod
    def integrals(self, state_k: FieldState, w3: np.ndarray, first_step: bool) -> DuhamelIntegrals:
        """
        Approximate both step integrals.

        Args:
            state_k: State at t_k
            w3: psi'_k - psi'_{k-1}, or psi''_0 on the first step
            first_step: Selects the tau^2 weight 1/2 instead of 1/(2h)

        Returns:
            DuhamelIntegrals with the sin- and cos-kernel integrals
        """
        pass

    def sin_integral(self, state_k: FieldState, w3: np.ndarray, first_step: bool = False) -> np.ndarray:
        return self.integrals(state_k, w3, first_step).sin(self.grid)

    def cos_integral(self, state_k: FieldState, w3: np.ndarray, first_step: bool = False) -> np.ndarray:
        return self.integrals(state_k, w3, first_step).cos(self.grid)

    def _check_inputs(self, state_k: FieldState, w3: np.ndarray) -> np.ndarray:
        state_k.check_on(self.grid)
        w3 = np.asarray(w3, dtype=complex)
        if w3.shape != (self.grid.M,):
            raise QuadratureError(f"w3 has shape {w3.shape}, expected ({self.grid.M},)")
        return w3


def _combine(grid: SpectralGrid, hat: np.ndarray, phys: Optional[np.ndarray]) -> np.ndarray:
    result = grid.inverse(hat)
    if phys is not None:
        result = result + phys
    return result


class QuadratureError(RuntimeError):
    """Exception raised when a step integral cannot be assembled."""
    pass
