"""Bubble-enriched Q1-Q1 quadrilateral Stokes element.

Exact rational patch-stability checks for four bubble enrichments, a
numerical inf-sup estimator, and manufactured-solution convergence studies
on structured parallelogram meshes.
"""

from .mesh import build_dof_maps, build_structured_mesh, level_subdivisions
from .refelem import BubbleKind, bubble, gauss_rule, q1_basis
from .solver import SingularSystemError, SolveStatus, solve_saddle
from .stability import (
    MacroMatrix,
    StabilityReport,
    build_macro_matrix,
    check_m1,
    estimate_infsup,
    infsup_sweep,
    rational_rank,
)
from .verify import (
    ErrorReport,
    eoc,
    error_norms,
    manufactured_case,
    run_convergence_study,
)

__all__ = [
    "BubbleKind",
    "ErrorReport",
    "MacroMatrix",
    "SingularSystemError",
    "SolveStatus",
    "StabilityReport",
    "bubble",
    "build_dof_maps",
    "build_macro_matrix",
    "build_structured_mesh",
    "check_m1",
    "eoc",
    "error_norms",
    "estimate_infsup",
    "gauss_rule",
    "infsup_sweep",
    "level_subdivisions",
    "manufactured_case",
    "q1_basis",
    "rational_rank",
    "run_convergence_study",
    "solve_saddle",
]

__version__ = "0.1.0"
