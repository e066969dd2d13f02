"""Exclusion process with jumps from zero (JEP).

Exact and Monte-Carlo dynamics, plus the Gibbs equilibrium reached under
memoryless set-avoiding jumps."""

from .distributions import (
    BoundedUniformFamily,
    CallableFamily,
    GeometricStream,
    JumpFamily,
    MemorylessFamily,
    TableFamily,
)
from .errors import DomainError, NumericalError, TruncationError, UndefinedIndexError
from .sets import ParticleConfig, avoiding_shift, count_below, noncolliding_union, parse_config

__all__ = [
    "BoundedUniformFamily",
    "CallableFamily",
    "DomainError",
    "GeometricStream",
    "JumpFamily",
    "MemorylessFamily",
    "NumericalError",
    "ParticleConfig",
    "TableFamily",
    "TruncationError",
    "UndefinedIndexError",
    "avoiding_shift",
    "count_below",
    "noncolliding_union",
    "parse_config",
]

__version__ = "0.1.0"
