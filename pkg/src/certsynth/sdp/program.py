"""SOS-to-SDP compiler.

An :class:`SosProgram` collects scalar/matrix/polynomial decision
variables, polynomial equality constraints, scalar- and matrix-SOS
constraints (via Gram parameterization with Newton-polytope pruning), PSD
constraints, and a linear objective.  ``compile`` lowers everything to a
standard-form conic problem

    minimize q' w   subject to   A w + s = b,   s in (zero x nonneg x PSD)

consumed by the pluggable backends.  Compilation is deterministic: the
same program always yields bit-identical problem data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..poly import Exponents, MatrixPolynomial, Polynomial, grlex_key
from .expr import LinExpr, PolyExpr

SQRT2 = math.sqrt(2.0)


@dataclass
class GramInfo:
    name: str
    size: int
    index_matrix: np.ndarray  # size x size array of variable indices (symmetric)
    half_basis: list[Exponents]
    nvars: int


@dataclass
class PsdConstraint:
    name: str
    entries: list[list[LinExpr]]


@dataclass
class ConicProblem:
    q: np.ndarray
    A: sp.csc_matrix
    b: np.ndarray
    cones: list[tuple[str, int]]  # ("zero"|"nonneg"|"psd", dim)
    n_eq_rows: int
    n_vars: int
    infeasible_reason: str | None = None

    def to_bytes(self) -> bytes:
        parts = [
            repr(self.cones).encode(),
            self.q.tobytes(),
            self.b.tobytes(),
            self.A.indptr.astype(np.int64).tobytes(),
            self.A.indices.astype(np.int64).tobytes(),
            self.A.data.tobytes(),
        ]
        return b"|".join(parts)


def newton_half_candidates(support: list[Exponents], nvars: int) -> list[Exponents]:
    """Candidate half-basis exponents from outer bounds on the halved Newton polytope.

    Uses the total-degree and per-variable-degree linear functionals; any
    valid SOS support point must satisfy all of them, so pruning with them
    preserves correctness.
    """
    if not support:
        return [(0,) * nvars]
    totals = [sum(e) for e in support]
    lo_t = math.ceil(min(totals) / 2)
    hi_t = max(totals) // 2
    lo_v = [math.ceil(min(e[v] for e in support) / 2) for v in range(nvars)]
    hi_v = [max(e[v] for e in support) // 2 for v in range(nvars)]
    out: list[Exponents] = []

    def rec(prefix: list[int], v: int, total: int):
        if v == nvars:
            if lo_t <= total <= hi_t:
                out.append(tuple(prefix))
            return
        remaining_max = sum(hi_v[v:])
        if total + remaining_max < lo_t:
            return
        for e in range(lo_v[v], hi_v[v] + 1):
            if total + e > hi_t:
                break
            prefix.append(e)
            rec(prefix, v + 1, total + e)
            prefix.pop()

    rec([], 0, 0)
    out.sort(key=grlex_key)
    return out


def diagonal_prune(
    half_basis: list[Exponents], support: set[Exponents]
) -> list[Exponents]:
    """Drop candidates whose squared monomial nothing else can balance.

    If 2z is neither in the target support nor reachable as a sum of two
    other kept candidates, the Gram diagonal at z is forced to zero and
    the whole row with it.
    """
    keep = list(half_basis)
    changed = True
    while changed:
        changed = False
        pair_sums: set[Exponents] = set()
        for i, u in enumerate(keep):
            for v in keep[i + 1 :]:
                pair_sums.add(tuple(a + b for a, b in zip(u, v)))
        kept = []
        for z in keep:
            doubled = tuple(2 * e for e in z)
            if doubled in support or doubled in pair_sums:
                kept.append(z)
            else:
                changed = True
        keep = kept
    return keep


def monomials_up_to(nvars: int, degree: int) -> list[Exponents]:
    out: list[Exponents] = []

    def rec(prefix: list[int], v: int, total: int):
        if v == nvars:
            out.append(tuple(prefix))
            return
        for e in range(degree - total + 1):
            prefix.append(e)
            rec(prefix, v + 1, total + e)
            prefix.pop()

    rec([], 0, 0)
    out.sort(key=grlex_key)
    return out


class SosProgram:
    def __init__(self, gram_shift: float = 1e-9):
        # Grams are constrained G >= -gram_shift * I; forced-singular SOS
        # decompositions otherwise leave no strictly feasible point and
        # stall the interior-point backend.  The shift stays far inside the
        # post-solve eigenvalue tolerance.
        self.gram_shift = float(gram_shift)
        self._names: list[str] = []
        self._scalars: dict[str, int] = {}
        self._sym_mats: dict[str, np.ndarray] = {}
        self._poly_mats: dict[str, tuple[int, int, list[Exponents], np.ndarray, int]] = {}
        self.grams: list[GramInfo] = []
        self._eqs: list[LinExpr] = []
        self._nonneg: list[LinExpr] = []
        self._psd: list[PsdConstraint] = []
        self._objective: LinExpr | None = None
        self._infeasible_reason: str | None = None

    # ---------------- variables ----------------

    @property
    def n_vars(self) -> int:
        return len(self._names)

    def _new_var(self, name: str) -> int:
        self._names.append(name)
        return len(self._names) - 1

    def new_scalar(self, name: str) -> LinExpr:
        if name in self._scalars:
            raise ValueError(f"duplicate variable {name!r}")
        idx = self._new_var(name)
        self._scalars[name] = idx
        return LinExpr.var(idx)

    def new_sym_matrix(self, name: str, size: int) -> list[list[LinExpr]]:
        """Symmetric matrix variable; PSD only if the caller adds add_psd."""
        if name in self._sym_mats:
            raise ValueError(f"duplicate variable {name!r}")
        indices = np.zeros((size, size), dtype=int)
        for j in range(size):
            for i in range(j + 1):
                idx = self._new_var(f"{name}[{i},{j}]")
                indices[i, j] = indices[j, i] = idx
        self._sym_mats[name] = indices
        return [[LinExpr.var(indices[i, j]) for j in range(size)] for i in range(size)]

    def new_poly_matrix(
        self,
        name: str,
        rows: int,
        cols: int,
        monomials: list[Exponents],
        nvars: int,
    ) -> list[list[PolyExpr]]:
        """Matrix of decision polynomials over the given monomial support."""
        if name in self._poly_mats:
            raise ValueError(f"duplicate variable {name!r}")
        monomials = sorted(set(tuple(m) for m in monomials), key=grlex_key)
        indices = np.zeros((rows, cols, len(monomials)), dtype=int)
        out = []
        for i in range(rows):
            row = []
            for j in range(cols):
                terms = {}
                for k, exps in enumerate(monomials):
                    idx = self._new_var(f"{name}[{i},{j}]:{exps}")
                    indices[i, j, k] = idx
                    terms[exps] = LinExpr.var(idx)
                row.append(PolyExpr(nvars, terms))
            out.append(row)
        self._poly_mats[name] = (rows, cols, monomials, indices, nvars)
        return out

    def _new_gram(
        self, name: str, half_basis: list[Exponents], nvars: int
    ) -> tuple[PolyExpr, GramInfo]:
        """Fresh Gram matrix over the half basis; returns z' G z and its info."""
        size = len(half_basis)
        if size == 0:
            info = GramInfo(name, 0, np.zeros((0, 0), dtype=int), [], nvars)
            self.grams.append(info)
            return PolyExpr.zero(nvars), info
        indices = np.zeros((size, size), dtype=int)
        for j in range(size):
            for i in range(j + 1):
                idx = self._new_var(f"{name}.G[{i},{j}]")
                indices[i, j] = indices[j, i] = idx
        info = GramInfo(name, size, indices, list(half_basis), nvars)
        self.grams.append(info)
        self._psd.append(
            PsdConstraint(
                name,
                [
                    [
                        LinExpr.var(indices[i, j]) + (self.gram_shift if i == j else 0.0)
                        for j in range(size)
                    ]
                    for i in range(size)
                ],
            )
        )
        terms: dict[Exponents, LinExpr] = {}
        for i in range(size):
            for j in range(i, size):
                key = tuple(a + b for a, b in zip(half_basis[i], half_basis[j]))
                scale = 1.0 if i == j else 2.0
                contrib = LinExpr.var(indices[i, j], scale)
                terms[key] = terms[key] + contrib if key in terms else contrib
        return PolyExpr(nvars, terms), info

    def new_sos_poly(self, name: str, nvars: int, degree: int) -> PolyExpr:
        """Decision polynomial constrained SOS by construction (multiplier form)."""
        half = monomials_up_to(nvars, degree // 2)
        expr, _ = self._new_gram(name, half, nvars)
        return expr

    # ---------------- constraints ----------------

    def add_eq(self, lhs, rhs=None) -> None:
        """Equality constraint; operands may be LinExpr, PolyExpr, Polynomial, or scalars."""
        a = _coerce(lhs)
        b = _coerce(rhs) if rhs is not None else None
        if isinstance(a, PolyExpr) or isinstance(b, PolyExpr):
            nvars = a.nvars if isinstance(a, PolyExpr) else b.nvars
            if not isinstance(a, PolyExpr):
                a = PolyExpr.from_linexpr(a, nvars)
            if b is not None and not isinstance(b, PolyExpr):
                b = PolyExpr.from_linexpr(b, nvars)
            diff = a - b if b is not None else a
            for _, lin in diff.sorted_items():
                self._eqs.append(lin)
            return
        diff = a - b if b is not None else a
        self._eqs.append(diff)

    def add_eq_matrix(self, lhs, rhs) -> None:
        rows = len(lhs)
        cols = len(lhs[0])
        if len(rhs) != rows or len(rhs[0]) != cols:
            raise ValueError("shape mismatch")
        for i in range(rows):
            for j in range(cols):
                self.add_eq(lhs[i][j], rhs[i][j])

    def add_nonneg(self, expr) -> None:
        expr = _coerce(expr)
        if isinstance(expr, PolyExpr):
            expr = expr.constant_part()
        self._nonneg.append(expr)

    def add_psd(self, entries: list[list], margin: float = 0.0, name: str = "psd") -> None:
        """Constrain a symmetric affine matrix expression minus margin*I to the PSD cone."""
        size = len(entries)
        block = []
        for i in range(size):
            if len(entries[i]) != size:
                raise ValueError("matrix must be square")
            row = []
            for j in range(size):
                e = entries[i][j]
                e = LinExpr.constant(float(e)) if isinstance(e, (int, float)) else e
                if i == j and margin:
                    e = e - margin
                row.append(e)
            block.append(row)
        self._psd.append(PsdConstraint(name, block))

    def add_sos(
        self,
        p,
        name: str = "sos",
        half_basis: list[Exponents] | None = None,
    ) -> GramInfo:
        """Constrain the polynomial expression to be a sum of squares."""
        p = _coerce(p)
        if isinstance(p, LinExpr):
            raise TypeError("scalar expressions take add_nonneg")
        support = set(p.terms.keys())
        if half_basis is None:
            half_basis = newton_half_candidates(sorted(support, key=grlex_key), p.nvars)
        half_basis = diagonal_prune(half_basis, support)
        zgz, info = self._new_gram(name, half_basis, p.nvars)
        residual = p - zgz
        representable = set(zgz.terms.keys())
        for exps, lin in residual.sorted_items():
            if lin.is_constant() and exps not in representable and lin.const != 0.0:
                self._infeasible_reason = (
                    f"constraint {name!r}: monomial outside any SOS support"
                )
            self._eqs.append(lin)
        return info

    def add_sos_matrix(
        self,
        entries: list[list[PolyExpr]],
        nvars: int,
        name: str = "sos_matrix",
        localizers: list[Polynomial] | None = None,
        multiplier_degree: int = 2,
        margin: Polynomial | list[Polynomial] | None = None,
        slack: "LinExpr | float | None" = None,
    ) -> GramInfo:
        """Matrix-SOS constraint via the quadratic-form scalarization.

        With S the (symmetric) matrix expression and z fresh scalarization
        variables, enforces that

            z' S(x) z - sum_j L_j(x, z) g_j(x) - z' diag(margin)(x) z

        is SOS in (x, z), where each localizer multiplier L_j is itself an
        SOS form quadratic in z.  ``margin`` may be a single polynomial
        (uniform diagonal weight) or one polynomial per diagonal entry.

        ``slack`` relaxes the constraint by +slack * w_k(x) on diagonal k,
        where w_k sums the squares of row k's half-basis candidates; some
        data-consistent decrease conditions are feasible only up to a
        tolerance-level slack, which callers minimize and then freeze.
        """
        size = len(entries)
        ext = nvars + size

        def lift(exps: Exponents, yi: int, yj: int) -> Exponents:
            y = [0] * size
            y[yi] += 1
            y[yj] += 1
            return tuple(exps) + tuple(y)

        terms: dict[Exponents, LinExpr] = {}

        def accumulate(pe: PolyExpr, yi: int, yj: int, scale: float):
            for exps, lin in pe.terms.items():
                key = lift(exps, yi, yj)
                contrib = lin * scale
                terms[key] = terms[key] + contrib if key in terms else contrib

        diag_support: list[set[Exponents]] = [set() for _ in range(size)]
        for i in range(size):
            for j in range(i, size):
                e = entries[i][j]
                scale = 1.0 if i == j else 2.0
                accumulate(e, i, j, scale)
                if i == j:
                    diag_support[i].update(e.terms.keys())
        if margin is not None:
            diag = margin if isinstance(margin, list) else [margin] * size
            for k, m in enumerate(diag):
                if m is None or not m.terms:
                    continue
                neg = PolyExpr.from_polynomial(-m)
                accumulate(neg, k, k, 1.0)
                diag_support[k].update(neg.terms.keys())

        # The z_k^2 part of any matrix-SOS decomposition is itself SOS in x,
        # so row k draws candidates from its own diagonal's Newton bounds;
        # the same bounds shape the localizer multipliers, which avoids
        # propagating one row's forced zero structure to the others.
        def candidates(k: int, cap: int | None = None):
            support = sorted(diag_support[k], key=grlex_key)
            out = newton_half_candidates(support, nvars)
            if cap is not None:
                out = [b for b in out if sum(b) <= cap]
            return out

        # Localizer multipliers are matrix-SOS in the scalarization
        # variables: one Gram per region polynomial over {z_k x^beta}.
        mult_products: list[tuple[PolyExpr, Polynomial]] = []
        for idx, g in enumerate(localizers or []):
            g_scale = g.max_abs_coeff()
            g_unit = g.scale(1.0 / g_scale) if g_scale > 0 else g
            half = []
            for k in range(size):
                for beta in candidates(k, cap=max(multiplier_degree // 2, 0)):
                    half.append(beta + tuple(1 if t == k else 0 for t in range(size)))
            if not half:
                continue
            mult, _ = self._new_gram(f"{name}.L{idx}", half, ext)
            g_ext = Polynomial(ext, {e + (0,) * size: c for e, c in g_unit.terms.items()})
            prod = mult.mul_poly(g_ext).scale(-1.0)
            mult_products.append((prod, g_unit))
            for exps, lin in prod.terms.items():
                terms[exps] = terms[exps] + lin if exps in terms else lin
                yk = [i for i, e in enumerate(exps[nvars:]) if e]
                if len(yk) == 1:  # z_k^2 contribution
                    diag_support[yk[0]].add(exps[:nvars])

        final_candidates = [candidates(k) for k in range(size)]
        if slack is not None:
            lin = LinExpr.constant(float(slack)) if isinstance(slack, (int, float)) else slack
            for k in range(size):
                weight = Polynomial(
                    nvars,
                    {tuple(2 * e for e in beta): 1.0 for beta in final_candidates[k]},
                )
                if not weight.terms:
                    continue
                pe = PolyExpr(nvars, {e: lin * c for e, c in weight.terms.items()})
                accumulate(pe, k, k, 1.0)

        half_basis = []
        for k in range(size):
            for beta in final_candidates[k]:
                half_basis.append(
                    beta + tuple(1 if t == k else 0 for t in range(size))
                )
        p = PolyExpr(ext, terms)
        return self.add_sos(p, name=name, half_basis=half_basis)

    def minimize(self, expr: LinExpr) -> None:
        self._objective = expr

    def maximize(self, expr: LinExpr) -> None:
        self._objective = -expr

    # ---------------- compilation ----------------

    def compile(self) -> ConicProblem:
        n = self.n_vars
        rows_i: list[int] = []
        cols_i: list[int] = []
        vals: list[float] = []
        b: list[float] = []
        row = 0

        def emit(lin: LinExpr, scale: float):
            nonlocal row
            for k in sorted(lin.coeffs):
                rows_i.append(row)
                cols_i.append(k)
                vals.append(-scale * lin.coeffs[k])
            b.append(scale * lin.const)
            row += 1

        cones: list[tuple[str, int]] = []
        # zero cone: A w + s = b, s = 0  ->  emit with scale -1 so rows read A w = b
        for lin in self._eqs:
            emit(lin, -1.0)
        if self._eqs:
            cones.append(("zero", len(self._eqs)))
        for lin in self._nonneg:
            emit(lin, 1.0)
        if self._nonneg:
            cones.append(("nonneg", len(self._nonneg)))
        for block in self._psd:
            size = len(block.entries)
            for j in range(size):
                for i in range(j + 1):
                    emit(block.entries[i][j], 1.0 if i == j else SQRT2)
            cones.append(("psd", size))

        q = np.zeros(n)
        if self._objective is not None:
            for k, v in self._objective.coeffs.items():
                q[k] = v
        elif self.grams:
            # pure feasibility stalls on rank-deficient optimal Grams; the
            # minimal-trace decomposition is a crisp, well-centered target
            for info in self.grams:
                for k in np.diag(info.index_matrix):
                    q[k] = 1.0
        A = sp.csc_matrix(
            (np.array(vals), (np.array(rows_i, dtype=int), np.array(cols_i, dtype=int))),
            shape=(row, n),
        )
        return ConicProblem(
            q=q,
            A=A,
            b=np.array(b),
            cones=cones,
            n_eq_rows=len(self._eqs),
            n_vars=n,
            infeasible_reason=self._infeasible_reason,
        )

    # ---------------- extraction ----------------

    def scalar_value(self, name: str, w: np.ndarray) -> float:
        return float(w[self._scalars[name]])

    def sym_matrix_value(self, name: str, w: np.ndarray) -> np.ndarray:
        indices = self._sym_mats[name]
        return w[indices].copy()

    def poly_matrix_value(self, name: str, w: np.ndarray) -> MatrixPolynomial:
        rows, cols, monomials, indices, nvars = self._poly_mats[name]
        entries = []
        for i in range(rows):
            for j in range(cols):
                terms = {
                    exps: float(w[indices[i, j, k]])
                    for k, exps in enumerate(monomials)
                }
                entries.append(Polynomial(nvars, terms))
        return MatrixPolynomial(rows, cols, entries)

    def gram_value(self, info: GramInfo, w: np.ndarray) -> np.ndarray:
        return w[info.index_matrix].copy()


def _coerce(obj):
    if isinstance(obj, (LinExpr, PolyExpr)):
        return obj
    if isinstance(obj, Polynomial):
        return PolyExpr.from_polynomial(obj)
    if isinstance(obj, (int, float)):
        return LinExpr.constant(float(obj))
    raise TypeError(f"cannot use {type(obj)!r} in a constraint")
