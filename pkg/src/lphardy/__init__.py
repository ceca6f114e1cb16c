"""Octant Hardy space decompositions of L^p functions for 0 < p < 1.

Rational atoms are approximated, split into ``2**n`` octant components,
certified, and measured with singularity-aware quadrature.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DegeneratePhase,
    DimensionMismatch,
    DistinctnessViolation,
    DivergentIntegral,
    IllConditionedFit,
    IntegrabilityViolation,
    LpHardyError,
    NonConvergence,
    PhaseSearchFailed,
    PoleProximity,
    SchemaError,
    ToleranceNotMet,
)
from .polyalg import MultiPoly, SeparableRational, UniPoly, roots  # noqa: E402
from .quadrature import QuasiNormResult, bound_constant, lp_quasinorm  # noqa: E402
from .hardy import HardyCertificate, Status, certify, interior_sup_check  # noqa: E402
from .split import OctantSplit, SplitParams, select_phase, split_atom  # noqa: E402
from .approx import SampledFunction, fit_atom, telescope  # noqa: E402
from .decompose import DecomposeConfig, OctantDecomposition, decompose  # noqa: E402
from .density import MollifierParams, fit_RN, mollifier_eval, mollify  # noqa: E402
from .intersect import alternative_decomposition, glue_common_approximant, make_xp_atom  # noqa: E402

__all__ = [
    "DecomposeConfig",
    "DegeneratePhase",
    "DimensionMismatch",
    "DistinctnessViolation",
    "DivergentIntegral",
    "HardyCertificate",
    "IllConditionedFit",
    "IntegrabilityViolation",
    "LpHardyError",
    "MollifierParams",
    "MultiPoly",
    "NonConvergence",
    "OctantDecomposition",
    "OctantSplit",
    "PhaseSearchFailed",
    "PoleProximity",
    "QuasiNormResult",
    "SampledFunction",
    "SchemaError",
    "SeparableRational",
    "SplitParams",
    "Status",
    "ToleranceNotMet",
    "UniPoly",
    "alternative_decomposition",
    "bound_constant",
    "certify",
    "decompose",
    "fit_RN",
    "fit_atom",
    "glue_common_approximant",
    "interior_sup_check",
    "lp_quasinorm",
    "make_xp_atom",
    "mollifier_eval",
    "mollify",
    "roots",
    "select_phase",
    "split_atom",
    "telescope",
]
