"""
Spatial discretization: periodic Fourier grid, field states and mass models.
"""

from .grid import (
    FieldState,
    GridError,
    OperatorKind,
    SpectralGrid,
    apply_operator_function,
    build_grid,
    free_energy,
    free_propagator,
    l2_distance,
)
from .mass import (
    EnvelopeSampler,
    MassModel,
    MassModelError,
    MassTerm,
    preset_constant,
    preset_example1,
    preset_example2,
    preset_free,
)

__all__ = [
    "EnvelopeSampler",
    "FieldState",
    "GridError",
    "MassModel",
    "MassModelError",
    "MassTerm",
    "OperatorKind",
    "SpectralGrid",
    "apply_operator_function",
    "build_grid",
    "free_energy",
    "free_propagator",
    "l2_distance",
    "preset_constant",
    "preset_example1",
    "preset_example2",
    "preset_free",
]
