"""Normal defect of square matrices: bounds, explicit minimal completions and search."""

from .defect import (
    CompletionResult,
    DefectBounds,
    defect_bounds,
    dilation_completion,
    epsilon,
    is_leading_principal_submatrix,
    normality_residual,
    trivial_completion,
)
from .matcore import Inertia, adjoint, commutator, hermitian_eigenvalues, inertia, numeric_rank
from .search import SearchConfig, defect_estimate, search_completion
from .superdiag4 import classify, minimal_completion, phase_reduce, superdiag_matrix

__version__ = "0.1.0"
