"""Numerical laboratory for a non-contracting interval IFS and its porcupine skew product."""
from .fiber_maps import (CANONICAL, ConditionReport, ConstructionError, DomainError,
                         FiberMapPair, FiberMapParams, ParameterError, ShapeControls,
                         build_pair, canonical_pair, derive_params, pair_from_dict, validate)
from .orbit import PeriodicOrbit
from .symbolic import Cylinder, SeqSpec, Word, metric, parse_seq, shift, shift_back, truncate

__version__ = "0.1.0"

__all__ = [
    "CANONICAL", "ConditionReport", "ConstructionError", "Cylinder", "DomainError",
    "FiberMapPair", "FiberMapParams", "ParameterError", "PeriodicOrbit", "SeqSpec",
    "ShapeControls", "Word", "build_pair", "canonical_pair", "derive_params", "metric",
    "pair_from_dict", "parse_seq", "shift", "shift_back", "truncate", "validate",
]
