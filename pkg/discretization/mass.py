"""
Mass models in truncated modulated Fourier form.

    m(x, t) = sum_n a_n(x, t) exp(i omega_n t)

Each term carries its envelope a_n and the envelope's time derivative as two
separate callbacks of (grid, t); derivatives are never differenced inside the
solver. omega_n = 0 terms are ordinary terms.
"""

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Optional, Tuple

import numpy as np
import structlog

from .grid import SpectralGrid

logger = structlog.get_logger(__name__)

Envelope = Callable[[SpectralGrid, float], np.ndarray]


def zero_envelope(grid: SpectralGrid, t: float) -> np.ndarray:
    """Envelope (or envelope derivative) that vanishes identically."""
    return np.zeros(grid.M, dtype=complex)


def quadratic_envelope(coefficient: complex) -> Envelope:
    """Time-independent envelope coefficient * x^2."""

    def envelope(grid: SpectralGrid, t: float) -> np.ndarray:
        return coefficient * grid.nodes.astype(complex) ** 2

    return envelope


def constant_envelope(value: complex) -> Envelope:
    def envelope(grid: SpectralGrid, t: float) -> np.ndarray:
        return np.full(grid.M, value, dtype=complex)

    return envelope


@dataclass(frozen=True)
class MassTerm:
    """One modulated term (omega_n, a_n, d/dt a_n)."""

    omega: float
    envelope: Envelope
    envelope_dt: Envelope = zero_envelope
    # Envelope does not depend on t; the sampler evaluates it once per grid.
    static: bool = False

    def values(self, grid: SpectralGrid, t: float) -> np.ndarray:
        return _checked(self.envelope(grid, t), grid, "envelope")

    def rates(self, grid: SpectralGrid, t: float) -> np.ndarray:
        return _checked(self.envelope_dt(grid, t), grid, "envelope_dt")


@dataclass(frozen=True)
class MassModel:
    """A list of modulated terms with cached maximal frequency."""

    terms: Tuple[MassTerm, ...]
    name: str = "custom"
    real_valued: bool = False
    omega_max: float = field(init=False)

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise MassModelError("A mass model needs at least one term")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "omega_max", max(abs(float(term.omega)) for term in terms))

    @property
    def omegas(self) -> np.ndarray:
        return np.array([term.omega for term in self.terms], dtype=float)

    def __len__(self) -> int:
        return len(self.terms)

    def evaluate(self, grid: SpectralGrid, t: float) -> np.ndarray:
        """Return m(x_j, t) on the nodes."""
        total = np.zeros(grid.M, dtype=complex)
        for term in self.terms:
            total += term.values(grid, t) * np.exp(1j * term.omega * t)
        return total

    def truncated(self, max_omega: float) -> "MassModel":
        """Keep only the terms with |omega_n| <= max_omega."""
        kept = tuple(term for term in self.terms if abs(term.omega) <= max_omega)
        if not kept:
            raise MassModelError(f"No term of '{self.name}' has |omega| <= {max_omega}")
        return MassModel(
            terms=kept, name=f"{self.name}|omega<={max_omega:g}", real_valued=self.real_valued
        )

    def check_negative(self, grid: SpectralGrid, t: float) -> float:
        """
        Diagnostic for the sign convention m < 0.

        Returns the largest positive real part of m on the nodes (0 when m <= 0
        everywhere). Nothing in the integrators depends on the sign.
        """
        excess = float(max(np.max(self.evaluate(grid, t).real), 0.0))
        if excess > 0.0:
            logger.warning("mass_not_negative", model=self.name, t=t, max_real_part=excess)
        return excess


class EnvelopeSamples(NamedTuple):
    """Stacked envelope values and time derivatives, shape (N, M) each."""

    values: np.ndarray
    rates: np.ndarray


class EnvelopeSampler:
    """
    Evaluates all envelopes of a model at a time level and keeps the most
    recent levels, so that the t_k + h samples of one step serve as the t_k
    samples of the next.
    """

    def __init__(self, model: MassModel, grid: SpectralGrid, capacity: int = 8):
        self.model = model
        self.grid = grid
        self.capacity = capacity
        self._levels: "OrderedDict[float, EnvelopeSamples]" = OrderedDict()
        self._static_rows = [i for i, term in enumerate(model.terms) if term.static]
        self._dynamic_rows = [i for i, term in enumerate(model.terms) if not term.static]
        self._static: Optional[EnvelopeSamples] = None

    def sample(self, t: float) -> EnvelopeSamples:
        key = round(float(t), 12)
        cached = self._levels.get(key)
        if cached is not None:
            self._levels.move_to_end(key)
            return cached

        samples = self._evaluate(t)
        self._levels[key] = samples
        if len(self._levels) > self.capacity:
            self._levels.popitem(last=False)
        return samples

    def _evaluate(self, t: float) -> EnvelopeSamples:
        if self._static is None:
            self._static = self._stack(self._static_rows, t)
        if not self._dynamic_rows:
            return self._static

        values = self._static.values.copy()
        rates = self._static.rates.copy()
        for i in self._dynamic_rows:
            term = self.model.terms[i]
            values[i] = term.values(self.grid, t)
            rates[i] = term.rates(self.grid, t)
        return EnvelopeSamples(values=values, rates=rates)

    def _stack(self, rows: Iterable[int], t: float) -> EnvelopeSamples:
        shape = (len(self.model), self.grid.M)
        values = np.zeros(shape, dtype=complex)
        rates = np.zeros(shape, dtype=complex)
        for i in rows:
            term = self.model.terms[i]
            values[i] = term.values(self.grid, t)
            rates[i] = term.rates(self.grid, t)
        values.setflags(write=False)
        rates.setflags(write=False)
        return EnvelopeSamples(values=values, rates=rates)


def preset_example1(omega: float) -> MassModel:
    """
    m(x, t) = -(1 + cos(omega t)) x^2, as the terms
    (0, -x^2), (+omega, -x^2/2), (-omega, -x^2/2).
    """
    if omega < 0 or not np.isfinite(omega):
        raise MassModelError(f"omega must be a finite nonnegative number, got {omega}")
    half = quadratic_envelope(-0.5)
    return MassModel(
        terms=(
            MassTerm(0.0, quadratic_envelope(-1.0), static=True),
            MassTerm(float(omega), half, static=True),
            MassTerm(-float(omega), half, static=True),
        ),
        name=f"example1(omega={omega:g})",
        real_valued=True,
    )


def preset_example2() -> MassModel:
    """m(x, t) = -sum_{n=0}^{5} (1 + cos(10^n t)) x^2."""
    half = quadratic_envelope(-0.5)
    terms = [MassTerm(0.0, quadratic_envelope(-6.0), static=True)]
    for n in range(6):
        omega = 10.0**n
        terms.append(MassTerm(omega, half, static=True))
        terms.append(MassTerm(-omega, half, static=True))
    return MassModel(terms=tuple(terms), name="example2", real_valued=True)


def preset_constant(m0: float = -1.0) -> MassModel:
    """Spatially and temporally constant mass m(x, t) = m0."""
    return MassModel(
        terms=(MassTerm(0.0, constant_envelope(complex(m0)), static=True),),
        name=f"constant(m0={m0:g})",
        real_valued=True,
    )


def preset_free() -> MassModel:
    """The zero mass: the equation reduces to the free wave equation."""
    return MassModel(terms=(MassTerm(0.0, zero_envelope, static=True),), name="free", real_valued=True)


def _checked(values: np.ndarray, grid: SpectralGrid, what: str) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    if values.shape != (grid.M,):
        raise MassModelError(f"{what} returned shape {values.shape}, expected ({grid.M},)")
    return values


class MassModelError(ValueError):
    """Exception raised for malformed mass models or envelope callbacks."""
    pass
