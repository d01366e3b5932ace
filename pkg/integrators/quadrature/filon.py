"""
Filon-type quadrature of the step integrals.

Per term n and Taylor weight j the non-oscillatory factor
f(tau) = K(tau)[a_n(t_k + tau) p_j(tau) v_j] is replaced by the quadratic
p(tau) = f(0) + f'(0) tau + (f'(h) - f'(0)) / (2h) tau^2, which is then
integrated exactly against exp(i omega_n (t_k + tau)) through the moments.
The error is O(h^4) locally with a constant that does not depend on omega_n.

Kernel derivatives used (envelope multiplication first, operator second):

    d/dtau [G^{-1} sin((h - tau) G) a .] = -cos((h - tau) G) a . + G^{-1} sin((h - tau) G) a' .
    d/dtau [cos((h - tau) G) a .]        =  G sin((h - tau) G) a . + cos((h - tau) G) a' .

At tau = h the kernels reduce to 0 / -I (sin) and I / 0 (cos), so every
endpoint evaluation there is a pointwise product. At tau = 0 all terms and all
three weights share two kernel applications, one per transform-space
accumulator.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from discretization.grid import FieldState, SpectralGrid
from discretization.mass import EnvelopeSampler, MassModel

from .base import DuhamelIntegrals, DuhamelQuadrature, QuadratureError, taylor_weight
from .moments import MomentCache


@dataclass(eq=False)
class FilonWorkspace:
    """
    Scratch buffers for one assembly, each of length M.

    k0:   accumulator hit by K(0)
    dk0:  accumulator hit by K'(0)
    poly: v1 + h v2 + c h^2 v3, the Taylor polynomial at tau = h
    """

    k0: np.ndarray
    dk0: np.ndarray
    poly: np.ndarray

    @classmethod
    def for_grid(cls, grid: SpectralGrid) -> "FilonWorkspace":
        return cls(*(np.empty(grid.M, dtype=complex) for _ in range(3)))

    def fits(self, grid: SpectralGrid) -> bool:
        return all(buf.shape == (grid.M,) for buf in (self.k0, self.dk0, self.poly))


class FilonQuadrature(DuhamelQuadrature):
    """Fourth-order (locally) Filon quadrature, uniform in the frequencies."""

    def __init__(self, grid: SpectralGrid, model: MassModel, h: float,
                 sampler: Optional[EnvelopeSampler] = None,
                 mom_cache: Optional[MomentCache] = None, prepare: bool = True):
        super().__init__(grid, model, h, sampler)
        self.mom_cache = mom_cache if mom_cache is not None else MomentCache()
        if prepare:
            self.mom_cache.prepare(model.omegas, self.h)
        self._omegas = model.omegas
        self._moment_table = self.mom_cache.table(self._omegas, self.h)
        self._symbols = grid.operator_symbols(self.h)
        self._workspace = FilonWorkspace.for_grid(grid)

    @property
    def name(self) -> str:
        return "filon"

    def integrals(self, state_k: FieldState, w3: np.ndarray, first_step: bool,
                  ws: Optional[FilonWorkspace] = None) -> DuhamelIntegrals:
        w3 = self._check_inputs(state_k, w3)
        ws = ws or self._workspace
        h = self.h
        c = taylor_weight(h, first_step)
        v1, v2 = state_k.psi, state_k.dpsi

        lo = self.sampler.sample(state_k.t)
        hi = self.sampler.sample(state_k.t + h)

        # int_j(t_k) = exp(i omega_n t_k) mu_j: one multiply per term
        mu = self._moment_table * np.exp(1j * self._omegas * state_k.t)[:, None]
        mu1, mu2, mu3 = mu[:, 0], mu[:, 1], mu[:, 2]
        d = mu3 / (2.0 * h)  # weight of f'(h)
        e = mu2 - d  # weight of f'(0)

        a0_mu1 = mu1 @ lo.values
        a0_e = e @ lo.values
        da0_e = e @ lo.rates
        ah_d = d @ hi.values
        dah_d = d @ hi.rates

        # f(0) mu1 + f'(0) e, collected by the kernel that acts on them
        np.multiply(a0_mu1 + da0_e, v1, out=ws.k0)
        ws.k0 += a0_e * v2
        np.multiply(a0_e, v1, out=ws.dk0)

        np.multiply(h, v2, out=ws.poly)
        ws.poly += v1
        ws.poly += (c * h * h) * w3

        sin_phys = -ah_d * ws.poly
        cos_phys = dah_d * ws.poly + ah_d * (v2 + (2.0 * c * h) * w3)

        f0 = self.grid.forward(ws.k0)
        f1 = self.grid.forward(ws.dk0)
        sym = self._symbols
        return DuhamelIntegrals(
            sin_hat=sym.sinc_scaled * f0 - sym.cos * f1,
            cos_hat=sym.cos * f0 + sym.g_sin * f1,
            sin_phys=sin_phys,
            cos_phys=cos_phys,
        )


def _assemble(grid, model, mom_cache, state_k, w3, h, first_step, ws, sampler) -> DuhamelIntegrals:
    quadrature = FilonQuadrature(grid, model, h, sampler=sampler, mom_cache=mom_cache, prepare=False)
    if ws is not None and not ws.fits(grid):
        raise QuadratureError("Workspace buffers do not match the grid")
    return quadrature.integrals(state_k, w3, first_step, ws=ws)


def filon_sin_integral(grid: SpectralGrid, model: MassModel, mom_cache: MomentCache,
                       state_k: FieldState, w3: np.ndarray, h: float, first_step: bool = False,
                       ws: Optional[FilonWorkspace] = None,
                       sampler: Optional[EnvelopeSampler] = None) -> np.ndarray:
    """
    Filon approximation of
    int_0^h G^{-1} sin((h - tau) G) m(t_k + tau) [psi_k + tau psi'_k + c tau^2 w3] dtau.

    Moments for every (omega_n, h) must already be in mom_cache.
    """
    return _assemble(grid, model, mom_cache, state_k, w3, h, first_step, ws, sampler).sin(grid)


def filon_cos_integral(grid: SpectralGrid, model: MassModel, mom_cache: MomentCache,
                       state_k: FieldState, w3: np.ndarray, h: float, first_step: bool = False,
                       ws: Optional[FilonWorkspace] = None,
                       sampler: Optional[EnvelopeSampler] = None) -> np.ndarray:
    """Filon approximation of the cos((h - tau) G) step integral."""
    return _assemble(grid, model, mom_cache, state_k, w3, h, first_step, ws, sampler).cos(grid)
