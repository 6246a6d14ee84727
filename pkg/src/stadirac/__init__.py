"""Spacetime-algebra numerics for the rest-frame Dirac-Hestenes electron field."""

from .koga_field import DecompositionResult, FieldParams, SingularityError, SpacetimePoint
from .sta import Multivector

__version__ = "0.1.0"

__all__ = ["DecompositionResult", "FieldParams", "Multivector", "SingularityError", "SpacetimePoint"]
