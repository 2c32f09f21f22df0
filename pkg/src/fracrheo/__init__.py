"""Fractional viscoelastic relaxation modeling.

Forward solvers (L1 finite differences) and analytic kernels for the
Scott-Blair, fractional Kelvin-Voigt, fractional Maxwell, and fractional
quasi-linear models, plus a data pipeline and a particle-swarm-based
two-stage calibration workflow for step-strain relaxation experiments.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DataError,
    DomainError,
    FitError,
    FracRheoError,
    SchemaError,
)
from .models import FKVParams, FMParams, FQLVParams, SBParams

__all__ = [
    "__version__",
    "ConfigError",
    "DataError",
    "DomainError",
    "FitError",
    "FracRheoError",
    "SchemaError",
    "SBParams",
    "FKVParams",
    "FMParams",
    "FQLVParams",
]
