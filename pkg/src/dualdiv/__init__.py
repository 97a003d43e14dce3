"""Optimal dividend barriers for spectrally positive Levy processes.

Closed-form solutions of the barrier-until-ruin and barrier-with-capital-
injection dividend problems via scale functions of phase-type jump models,
with generator-based verification and Monte Carlo cross-checks.
"""

from .errors import (
    BracketFailure,
    ConfigError,
    ContourTooClose,
    DimensionMismatch,
    DualDivError,
    InvalidCost,
    InvalidPhaseType,
    KnotEvaluation,
    MultipleRootDetected,
    NotSubordinatorViolation,
    ParseError,
    SingularResolvent,
)
from .model import LevyModel, PathVariation, PhaseType, validate_model
from .presets import halfnormal_m6, preset_model
from .scale import ScaleFunction, build_scale, find_roots, laplace_inversion_oracle, phi

__all__ = [
    "BracketFailure",
    "ConfigError",
    "ContourTooClose",
    "DimensionMismatch",
    "DualDivError",
    "InvalidCost",
    "InvalidPhaseType",
    "KnotEvaluation",
    "LevyModel",
    "MultipleRootDetected",
    "NotSubordinatorViolation",
    "ParseError",
    "PathVariation",
    "PhaseType",
    "ScaleFunction",
    "SingularResolvent",
    "build_scale",
    "find_roots",
    "halfnormal_m6",
    "laplace_inversion_oracle",
    "phi",
    "preset_model",
    "validate_model",
]
