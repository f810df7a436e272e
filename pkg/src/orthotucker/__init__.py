"""Structured Tucker decompositions for tensors with an orthogonal basis of
singular vector tuples (or eigenvectors, for symmetric tensors)."""

from .config import DEFAULT_TOL, Tolerances
from .decomposition import (
    StructuredDecomposition,
    decompose,
    decompose_sym,
    normalize,
    reconstruct,
    relative_distance,
)
from .errors import DimensionError, OrthogonalityError, SymmetryError, TNSFormatError
from .manifold import ObjectiveSpec, OptimizerConfig, OptResult, minimize
from .patterns import (
    PatternIndexSet,
    distance,
    pattern_V,
    pattern_Vdiag,
    pattern_Vperp,
    pattern_Vsym,
    project,
)
from .tensor_core import flatten, group_action, inner, norm, rank_one, sym_action, unflatten

__version__ = "0.1.0"
