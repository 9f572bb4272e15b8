"""Conic solver backends.

Every backend consumes the standard-form problem produced by
``SosProgram.compile`` and reports a coarse status plus the primal point.
Clarabel is the native backend; SCS is an optional alternative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .program import ConicProblem


@dataclass
class BackendResult:
    status: str  # "optimal" | "infeasible" | "numerical_failure"
    x: np.ndarray | None
    description: str
    objective: float | None = None


class ClarabelBackend:
    """Interior-point conic backend (license-free)."""

    name = "clarabel"

    def __init__(
        self,
        tol: float = 1e-9,
        max_iter: int = 400,
        verbose: bool = False,
    ):
        self.tol = tol
        self.max_iter = max_iter
        self.verbose = verbose

    def solve(self, problem: ConicProblem) -> BackendResult:
        import clarabel
        import scipy.sparse as sp

        cones = []
        for kind, dim in problem.cones:
            if kind == "zero":
                cones.append(clarabel.ZeroConeT(dim))
            elif kind == "nonneg":
                cones.append(clarabel.NonnegativeConeT(dim))
            elif kind == "psd":
                cones.append(clarabel.PSDTriangleConeT(dim))
            else:
                raise ValueError(f"unsupported cone {kind!r}")
        settings = clarabel.DefaultSettings()
        settings.verbose = self.verbose
        settings.max_iter = self.max_iter
        settings.tol_feas = self.tol
        settings.tol_gap_abs = self.tol
        settings.tol_gap_rel = self.tol
        P = sp.csc_matrix((problem.n_vars, problem.n_vars))
        solver = clarabel.DefaultSolver(
            P, problem.q, problem.A, problem.b, cones, settings
        )
        sol = solver.solve()
        status = str(sol.status)
        x = np.asarray(sol.x)
        if status in ("Solved", "AlmostSolved"):
            return BackendResult("optimal", x, status, float(sol.obj_val))
        if "Infeasible" in status:
            return BackendResult("infeasible", None, status)
        # keep the final iterate: degenerate programs may stall on a point
        # that still passes the independent post-solve verification
        return BackendResult("numerical_failure", x if x.size else None, status)


class ScsBackend:
    """Optional first-order backend; lower accuracy than the native one."""

    name = "scs"

    def __init__(self, eps: float = 1e-9, max_iters: int = 200_000, verbose: bool = False):
        self.eps = eps
        self.max_iters = max_iters
        self.verbose = verbose

    def solve(self, problem: ConicProblem) -> BackendResult:
        import scs

        z = l = 0
        psd: list[int] = []
        for kind, dim in problem.cones:
            if kind == "zero":
                z += dim
            elif kind == "nonneg":
                l += dim
            else:
                psd.append(dim)
        cone = {"z": z, "l": l}
        if psd:
            cone["s"] = psd
        # reorder PSD rows: upper-triangle col-major -> SCS lower-triangle col-major
        perm = list(range(z + l))
        base = z + l
        for size in psd:
            for c in range(size):
                for r in range(c, size):
                    perm.append(base + r * (r + 1) // 2 + c)
            base += size * (size + 1) // 2
        perm = np.array(perm)
        A = problem.A.tocsr()[perm].tocsc()
        b = problem.b[perm]
        solver = scs.SCS(
            {"A": A, "b": b, "c": problem.q},
            cone,
            eps_abs=self.eps,
            eps_rel=self.eps,
            max_iters=self.max_iters,
            verbose=self.verbose,
        )
        out = solver.solve()
        status = out["info"]["status"]
        if "solved" in status.lower() and "inaccurate" not in status.lower():
            return BackendResult("optimal", np.asarray(out["x"]), status, out["info"]["pobj"])
        if "infeasible" in status.lower() or "unbounded" in status.lower():
            return BackendResult("infeasible", None, status)
        return BackendResult("numerical_failure", None, status)


def default_backend() -> ClarabelBackend:
    return ClarabelBackend()
