"""Discrete orthogonality weights for hypergeometric polynomial families on quadratic lattices."""
from __future__ import annotations

from .errors import (
    CanonicalizationError,
    ConvergenceConditionError,
    InvalidFamilyError,
    LatticeOrthoError,
    NodeCollisionError,
    SeriesDefinitionError,
)
from .families import FamilySpec, alpha_closed_form, make_family
from .hypergeom import HypSeries, SeriesStatus, SeriesValue, SummationOptions, eval_at
from .lattice import Case, FamilyParams, ValidationReport, classify, validate
from .weights import (
    CanonicalParams,
    WeightTable,
    canonicalize,
    direct_series_weight,
    weight,
    weight_table,
    weights_oracle,
)

__version__ = "0.1.0"
