"""Quantum memory criteria: deviation curves, decoherence times, discounted
criteria and parameter optimization."""

from ._qmem import *  # noqa: F401,F403
from ._qmem import (
    DegenerateScaleError,
    DimensionError,
    Error,
    HorizonError,
    NumericalError,
    RegularityError,
    StabilityError,
    ValidationError,
)
