"""Singular solutions of the Kadomtsev-Petviashvili equation.

Closed-form tau functions for soliton walls and harmonic, hyperbolic and
cosh breathers (single and determinant superpositions), their regularised
fields, finite-difference residual checks, profile kinematics, linear
dispersion, and OTIN amplitude scans.
"""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    AlphaSign, BreatherParams, BreatherSuperpositionParams, Coupling, Family, GridSpec,
    PhysicalContext, SolitonWallParams, SpecParseError, WallSuperpositionParams, WaveSpec,
    load_spec, read_spec, save_spec, validate,
)
from .solutions import Field, Quantity, eval_f, sample_field  # noqa: E402
from .tau import TauEvaluation, evaluate_tau  # noqa: E402

__all__ = [
    "AlphaSign", "BreatherParams", "BreatherSuperpositionParams", "Coupling", "Family",
    "GridSpec", "PhysicalContext", "SolitonWallParams", "SpecParseError",
    "WallSuperpositionParams", "WaveSpec", "load_spec", "read_spec", "save_spec", "validate",
    "Field", "Quantity", "eval_f", "sample_field", "TauEvaluation", "evaluate_tau",
]
