"""Simulation toolkit for a 1-bit reflective coding metasurface."""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    ArrayGeometry,
    CodingMatrix,
    Direction,
    DomainError,
    FrequencySpec,
    MetaAtomResponse,
)
