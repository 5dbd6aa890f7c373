"""Spectral toolkit for the nonlinear beam equation ``u_tt + Delta^2 u = omega |u|^{kappa-1} u``."""
from .errors import BeamError, ConfigError, NumericalError
from .kernels import BACKEND
from .spectral import BeamState, Field, GridSpec, NormSpec, Trajectory

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BeamError",
    "BeamState",
    "ConfigError",
    "Field",
    "GridSpec",
    "NormSpec",
    "NumericalError",
    "Trajectory",
]
