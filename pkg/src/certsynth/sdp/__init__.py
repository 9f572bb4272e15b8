from .backend import BackendResult, ClarabelBackend, ScsBackend, default_backend
from .expr import LinExpr, PolyExpr, symmetrize
from .program import (
    ConicProblem,
    GramInfo,
    SosProgram,
    monomials_up_to,
    newton_half_candidates,
)
from .solve import EQ_RESIDUAL_TOL, GRAM_EIG_TOL, SolveResult, solve, solve_compiled

__all__ = [
    "BackendResult",
    "ClarabelBackend",
    "ConicProblem",
    "EQ_RESIDUAL_TOL",
    "GRAM_EIG_TOL",
    "GramInfo",
    "LinExpr",
    "PolyExpr",
    "ScsBackend",
    "SolveResult",
    "SosProgram",
    "default_backend",
    "monomials_up_to",
    "newton_half_candidates",
    "solve",
    "solve_compiled",
    "symmetrize",
]
