"""Numerical toolkit for completely positive maps induced by row contractions."""

from .cpmap import KrausFamily, apply, cp_spectral_radius, is_row_contraction, limit_phi_n_I
from .errors import (
    ConvergenceError,
    CphError,
    DimensionError,
    DomainError,
    PreconditionError,
    StructureError,
)
from .fock import TruncatedFock, build_dilation, cnc_subspace, is_absolutely_continuous_finite
from .markov import canonical_form, markov_to_kraus, pac_markov
from .opcore import DEFAULT_TOL, Projection, ToleranceConfig
from .similarity import similar_to_c00, similar_to_contraction, similar_to_strict
from .superharmonic import analyze, factor, pac_bounds

__version__ = "0.1.0"

__all__ = [
    "KrausFamily",
    "ToleranceConfig",
    "DEFAULT_TOL",
    "Projection",
    "TruncatedFock",
    "apply",
    "cp_spectral_radius",
    "is_row_contraction",
    "limit_phi_n_I",
    "analyze",
    "factor",
    "pac_bounds",
    "canonical_form",
    "pac_markov",
    "markov_to_kraus",
    "similar_to_contraction",
    "similar_to_c00",
    "similar_to_strict",
    "build_dilation",
    "cnc_subspace",
    "is_absolutely_continuous_finite",
    "CphError",
    "DimensionError",
    "DomainError",
    "PreconditionError",
    "ConvergenceError",
    "StructureError",
]
