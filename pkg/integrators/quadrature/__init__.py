"""
Quadratures for the Duhamel integrals of one time step.
"""

from .base import DuhamelIntegrals, DuhamelQuadrature, QuadratureError, taylor_weight
from .filon import FilonQuadrature, FilonWorkspace, filon_cos_integral, filon_sin_integral
from .gauss_legendre import GaussLegendreQuadrature, gauss_legendre_integral
from .moments import MomentCache, MomentError, OscillatoryMoments, moments

__all__ = [
    "DuhamelIntegrals",
    "DuhamelQuadrature",
    "FilonQuadrature",
    "FilonWorkspace",
    "GaussLegendreQuadrature",
    "MomentCache",
    "MomentError",
    "OscillatoryMoments",
    "QuadratureError",
    "filon_cos_integral",
    "filon_sin_integral",
    "gauss_legendre_integral",
    "moments",
    "taylor_weight",
]
