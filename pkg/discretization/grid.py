"""
Periodic Fourier collocation grid and trigonometric operator functions.

The transform convention is fixed: the forward transform is unnormalized and
the inverse carries the 1/M factor (numpy's default "backward" norm). Spectra
are stored in numpy's native ordering of modes {0, 1, ..., M/2-1, -M/2, ..., -1}.

G = sqrt(-Delta) is diagonal in this basis with symbol g_k = |2 pi k / L|.
G^{-1} sin(tG) is never formed by inverting G; it is applied as the entire
function t * sinc(tG), which is exactly t on the constant mode.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np
import structlog

logger = structlog.get_logger(__name__)


class OperatorKind(str, Enum):
    """Operator functions of G applied diagonally in transform space."""

    COS = "cos"  # cos(tG)
    SINC_SCALED = "sinc_scaled"  # G^{-1} sin(tG) = t sinc(tG)
    G_SIN = "g_sin"  # G sin(tG)


class OperatorSymbols(NamedTuple):
    """Multipliers of cos(tG), t sinc(tG) and G sin(tG) at one t."""

    cos: np.ndarray
    sinc_scaled: np.ndarray
    g_sin: np.ndarray


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Periodic 1-D collocation grid on [x0, x1) with M nodes."""

    x0: float
    x1: float
    M: int
    nodes: np.ndarray = field(repr=False)
    symbols_g: np.ndarray = field(repr=False)

    @property
    def length(self) -> float:
        return self.x1 - self.x0

    @property
    def dx(self) -> float:
        return self.length / self.M

    @property
    def g_max(self) -> float:
        """Largest symbol, attained at the Nyquist mode k = -M/2."""
        return float(np.pi * self.M / self.length)

    def forward(self, v: np.ndarray) -> np.ndarray:
        """Unnormalized forward transform."""
        return np.fft.fft(self._checked(v))

    def inverse(self, v_hat: np.ndarray) -> np.ndarray:
        """Inverse transform, carries 1/M."""
        return np.fft.ifft(self._checked(v_hat))

    def operator_symbols(self, t: float) -> OperatorSymbols:
        """Return the three operator multipliers at time t."""
        g = self.symbols_g
        tg = t * g
        return OperatorSymbols(
            cos=np.cos(tg),
            # np.sinc(x) = sin(pi x) / (pi x), so this is sin(tg)/g with limit t at g = 0
            sinc_scaled=t * np.sinc(tg / np.pi),
            g_sin=g * np.sin(tg),
        )

    def symbol(self, kind: OperatorKind, t: float) -> np.ndarray:
        symbols = self.operator_symbols(t)
        return getattr(symbols, OperatorKind(kind).value)

    def laplacian(self, v: np.ndarray) -> np.ndarray:
        """Spectral Laplacian, Delta = -G^2."""
        return self.inverse(-(self.symbols_g**2) * self.forward(v))

    def sample(self, func) -> np.ndarray:
        """Sample a callable of x on the nodes as a complex array."""
        return np.asarray(func(self.nodes), dtype=complex) * np.ones(self.M)

    def _checked(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        if v.shape != (self.M,):
            raise GridError(f"Expected array of length {self.M}, got shape {v.shape}")
        return v


@dataclass(frozen=True, eq=False)
class FieldState:
    """The pair (psi, psi') sampled on the grid at time t."""

    psi: np.ndarray
    dpsi: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=complex)
        dpsi = np.asarray(self.dpsi, dtype=complex)
        if psi.ndim != 1 or psi.shape != dpsi.shape:
            raise GridError(
                f"psi and dpsi must be 1-D of equal length, got {psi.shape} and {dpsi.shape}"
            )
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "dpsi", dpsi)
        object.__setattr__(self, "t", float(self.t))

    @classmethod
    def from_functions(cls, grid: SpectralGrid, psi0, dpsi0=None, t: float = 0.0) -> "FieldState":
        """Sample initial data given as callables of x."""
        dpsi = grid.sample(dpsi0) if dpsi0 is not None else np.zeros(grid.M, dtype=complex)
        return cls(psi=grid.sample(psi0), dpsi=dpsi, t=t)

    @property
    def size(self) -> int:
        return self.psi.shape[0]

    def check_on(self, grid: SpectralGrid) -> "FieldState":
        if self.size != grid.M:
            raise GridError(f"State of length {self.size} does not match grid with M={grid.M}")
        return self

    def imag_drift(self) -> float:
        """Largest imaginary magnitude of psi and dpsi."""
        return float(max(np.abs(self.psi.imag).max(), np.abs(self.dpsi.imag).max()))

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.psi).all() and np.isfinite(self.dpsi).all())


def build_grid(x0: float, x1: float, M: int) -> SpectralGrid:
    """
    Build the periodic grid x_j = x0 + j dx, j = 0..M-1 (x1 excluded).

    Raises:
        GridError: if M is odd or below 4, or x1 <= x0
    """
    if int(M) != M or M < 4 or M % 2:
        raise GridError(f"M must be an even integer >= 4, got {M}")
    if not x1 > x0:
        raise GridError(f"Need x1 > x0, got x0={x0}, x1={x1}")

    M = int(M)
    length = x1 - x0
    nodes = x0 + np.arange(M) * (length / M)
    modes = np.fft.fftfreq(M, d=1.0 / M)
    symbols_g = np.abs(2.0 * np.pi * modes / length)
    nodes.setflags(write=False)
    symbols_g.setflags(write=False)

    logger.debug("grid_built", x0=x0, x1=x1, M=M, g_max=float(symbols_g.max()))
    return SpectralGrid(x0=float(x0), x1=float(x1), M=M, nodes=nodes, symbols_g=symbols_g)


def apply_operator_function(
    grid: SpectralGrid, kind: OperatorKind, t: float, v: np.ndarray
) -> np.ndarray:
    """Apply cos(tG), G^{-1} sin(tG) or G sin(tG) to v."""
    return grid.inverse(grid.symbol(kind, t) * grid.forward(v))


def free_propagator(grid: SpectralGrid, t: float, state: FieldState) -> FieldState:
    """
    Exact free flight R(t):

        psi(t)  =  cos(tG) psi + G^{-1} sin(tG) psi'
        psi'(t) = -G sin(tG) psi + cos(tG) psi'
    """
    state.check_on(grid)
    symbols = grid.operator_symbols(t)
    psi_hat = grid.forward(state.psi)
    dpsi_hat = grid.forward(state.dpsi)
    return FieldState(
        psi=grid.inverse(symbols.cos * psi_hat + symbols.sinc_scaled * dpsi_hat),
        dpsi=grid.inverse(-symbols.g_sin * psi_hat + symbols.cos * dpsi_hat),
        t=state.t + t,
    )


def free_energy(grid: SpectralGrid, state: FieldState) -> float:
    """Quadratic form ||G psi||^2 + ||psi'||^2 (discrete, via Parseval)."""
    state.check_on(grid)
    psi_hat = grid.forward(state.psi)
    dpsi_hat = grid.forward(state.dpsi)
    total = np.sum(grid.symbols_g**2 * np.abs(psi_hat) ** 2) + np.sum(np.abs(dpsi_hat) ** 2)
    return float(total / grid.M)


def l2_distance(u: np.ndarray, v: Optional[np.ndarray] = None) -> float:
    """Unweighted Euclidean norm over nodes (no dx factor)."""
    diff = u if v is None else np.asarray(u) - np.asarray(v)
    return float(np.linalg.norm(diff))


class GridError(ValueError):
    """Exception raised for invalid grids or arrays that do not match a grid."""
    pass
