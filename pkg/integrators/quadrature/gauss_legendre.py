"""
Gauss-Legendre quadrature of the step integrals.

The full integrand, oscillatory phases included, is sampled at the nodes.
Its error constant grows with the frequencies, so this quadrature only serves
as the baseline that shows why a Filon-type rule is needed when |omega| h is
not small.
"""

from typing import Dict, List, Optional

import numpy as np

from discretization.grid import FieldState, OperatorSymbols, SpectralGrid
from discretization.mass import EnvelopeSampler, MassModel

from .base import DuhamelIntegrals, DuhamelQuadrature, QuadratureError, taylor_weight

# quadrature order -> number of nodes
SUPPORTED_ORDERS: Dict[int, int] = {4: 2, 6: 3, 8: 4}


class GaussLegendreQuadrature(DuhamelQuadrature):
    """Gauss-Legendre rule of order 4, 6 or 8 on [0, h]."""

    def __init__(self, grid: SpectralGrid, model: MassModel, h: float, order: int = 4,
                 sampler: Optional[EnvelopeSampler] = None):
        if order not in SUPPORTED_ORDERS:
            raise QuadratureError(
                f"Unsupported Gauss-Legendre order {order} (supported: {sorted(SUPPORTED_ORDERS)})"
            )
        super().__init__(grid, model, h, sampler)
        self.order = order

        x, w = np.polynomial.legendre.leggauss(SUPPORTED_ORDERS[order])
        self.nodes = 0.5 * self.h * (x + 1.0)
        self.weights = 0.5 * self.h * w
        self._omegas = model.omegas
        # kernels at h - tau_i, fixed for the run
        self._kernels: List[OperatorSymbols] = [
            grid.operator_symbols(self.h - tau) for tau in self.nodes
        ]

    @property
    def name(self) -> str:
        return f"gl{self.order}"

    def integrals(self, state_k: FieldState, w3: np.ndarray, first_step: bool) -> DuhamelIntegrals:
        w3 = self._check_inputs(state_k, w3)
        c = taylor_weight(self.h, first_step)
        sin_hat = np.zeros(self.grid.M, dtype=complex)
        cos_hat = np.zeros(self.grid.M, dtype=complex)

        for tau, weight, kernel in zip(self.nodes, self.weights, self._kernels):
            t = state_k.t + tau
            samples = self.sampler.sample(t)
            mass = np.exp(1j * self._omegas * t) @ samples.values
            taylor = state_k.psi + tau * state_k.dpsi + (c * tau * tau) * w3
            u_hat = self.grid.forward(mass * taylor)
            sin_hat += weight * kernel.sinc_scaled * u_hat
            cos_hat += weight * kernel.cos * u_hat

        return DuhamelIntegrals(sin_hat=sin_hat, cos_hat=cos_hat)


def gauss_legendre_integral(order: int, grid: SpectralGrid, model: MassModel,
                            state_k: FieldState, w3: np.ndarray, h: float,
                            first_step: bool = False, kernel: str = "sin",
                            sampler: Optional[EnvelopeSampler] = None) -> np.ndarray:
    """Gauss-Legendre approximation of the sin- or cos-kernel step integral."""
    if kernel not in ("sin", "cos"):
        raise QuadratureError(f"kernel must be 'sin' or 'cos', got {kernel!r}")
    quadrature = GaussLegendreQuadrature(grid, model, h, order=order, sampler=sampler)
    result = quadrature.integrals(state_k, w3, first_step)
    return result.sin(grid) if kernel == "sin" else result.cos(grid)
