"""Program solving with independent post-solve verification.

The three failure modes are re-checked here from the returned primal
point, independent of any claims made by the backend: solver status,
recovered Gram matrix eigenvalues, and equality residuals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConstraintsNotSos, NoSosDecomposition, SolutionFailure
from .backend import BackendResult, default_backend
from .program import ConicProblem, SosProgram

GRAM_EIG_TOL = 1e-7
EQ_RESIDUAL_TOL = 1e-6


@dataclass
class SolveResult:
    status: str  # "optimal" | "infeasible" | "numerical_failure"
    x: np.ndarray | None
    objective: float | None
    backend_description: str
    max_eq_violation: float = float("nan")
    min_gram_eigenvalue: float = float("nan")
    grams: list[tuple[str, np.ndarray]] = field(default_factory=list)


def solve(
    program: SosProgram,
    backend=None,
    gram_eig_tol: float = GRAM_EIG_TOL,
    eq_residual_tol: float = EQ_RESIDUAL_TOL,
) -> SolveResult:
    """Compile, solve, and verify; raises the taxonomy errors on failure."""
    problem = program.compile()
    return solve_compiled(
        program, problem, backend, gram_eig_tol=gram_eig_tol, eq_residual_tol=eq_residual_tol
    )


def solve_compiled(
    program: SosProgram,
    problem: ConicProblem,
    backend=None,
    gram_eig_tol: float = GRAM_EIG_TOL,
    eq_residual_tol: float = EQ_RESIDUAL_TOL,
) -> SolveResult:
    if problem.infeasible_reason is not None:
        raise SolutionFailure(problem.infeasible_reason)
    backend = backend or default_backend()
    result: BackendResult = backend.solve(problem)
    if result.status != "optimal":
        # a stalled iterate that satisfies every cone and equality within
        # tolerance is still a usable (possibly suboptimal) point
        if result.status == "numerical_failure" and result.x is not None:
            if _feasible_point(program, problem, result.x, eq_residual_tol, gram_eig_tol):
                result = BackendResult(
                    "optimal", result.x, f"{result.description} (salvaged iterate)"
                )
            else:
                raise SolutionFailure(result.description)
        else:
            raise SolutionFailure(result.description)
    w = result.x

    grams = [(info.name, program.gram_value(info, w)) for info in program.grams]
    min_eig = float("inf")
    for name, G in grams:
        if G.size == 0:
            continue
        eig = float(np.linalg.eigvalsh(G)[0])
        if eig < min_eig:
            min_eig = eig
        if eig < -gram_eig_tol:
            raise NoSosDecomposition(f"Gram matrix for {name!r} has eigenvalue {eig:.3e}")

    n_eq = problem.n_eq_rows
    if n_eq:
        residual = problem.A[:n_eq] @ w - problem.b[:n_eq]
        max_violation = float(np.max(np.abs(residual)))
    else:
        max_violation = 0.0
    if max_violation > eq_residual_tol:
        raise ConstraintsNotSos(f"max equality residual {max_violation:.3e}")

    return SolveResult(
        status="optimal",
        x=w,
        objective=result.objective,
        backend_description=result.description,
        max_eq_violation=max_violation,
        min_gram_eigenvalue=min_eig if grams else float("nan"),
        grams=grams,
    )


def _feasible_point(
    program: SosProgram,
    problem: ConicProblem,
    w: np.ndarray,
    eq_tol: float,
    psd_tol: float,
) -> bool:
    """Full feasibility check of an iterate against every cone."""
    n_eq = problem.n_eq_rows
    if n_eq and np.max(np.abs(problem.A[:n_eq] @ w - problem.b[:n_eq])) > eq_tol:
        return False
    for lin in program._nonneg:
        if lin.value(w) < -eq_tol:
            return False
    for block in program._psd:
        mat = np.array([[e.value(w) for e in row] for row in block.entries])
        mat = (mat + mat.T) / 2.0
        if np.linalg.eigvalsh(mat)[0] < -psd_tol:
            return False
    return True
