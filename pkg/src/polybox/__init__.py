"""Box-constrained optimization of sparse multivariate polynomials."""

from .errors import PolyboxError, ValidationError
from .poly import (
    Polynomial,
    ScalarPoly,
    eval_batch,
    eval_scalar,
    extract_scalar,
    from_record,
    new_polynomial,
    to_record,
    to_table,
)
from .solver import (
    MAXIMIZE,
    MINIMIZE,
    ROOT,
    Box,
    Objective,
    Solution,
    SolveOptions,
    make_grid,
    solve,
)
from .generate import GenSpec, generate_random_pol

__all__ = [
    "Box", "GenSpec", "MAXIMIZE", "MINIMIZE", "Objective", "PolyboxError",
    "Polynomial", "ROOT", "ScalarPoly", "Solution", "SolveOptions",
    "ValidationError", "eval_batch", "eval_scalar", "extract_scalar",
    "from_record", "generate_random_pol", "make_grid", "new_polynomial",
    "solve", "to_record", "to_table",
]
