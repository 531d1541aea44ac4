"""Hyperbolic-type metrics, cone geometry, condenser capacity and boundary-limit scanners
for quasiregular maps of the unit ball."""
from ._accel import backend
from .errors import (
    ArgumentError,
    ConvergenceError,
    DegeneratePointError,
    PreconditionError,
    SamplingError,
)

__version__ = "0.1.0"

__all__ = [
    "backend",
    "ArgumentError",
    "ConvergenceError",
    "DegeneratePointError",
    "PreconditionError",
    "SamplingError",
]
