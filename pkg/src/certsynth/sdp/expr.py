"""Affine expressions over decision variables and polynomials thereof.

A ``LinExpr`` is an affine form c + sum a_i w_i over the program's scalar
decision variables.  A ``PolyExpr`` maps monomial exponent tuples to
``LinExpr`` coefficients, so every polynomial constraint stays linear in
the decision variables.  Products of two decision-dependent objects are
deliberately unsupported.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from ..poly import Exponents, Polynomial, grlex_key


class LinExpr:
    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs: Mapping[int, float] | None = None, const: float = 0.0):
        self.coeffs = {k: float(v) for k, v in (coeffs or {}).items() if v != 0.0}
        self.const = float(const)

    @classmethod
    def var(cls, index: int, scale: float = 1.0) -> "LinExpr":
        return cls({index: scale})

    @classmethod
    def constant(cls, value: float) -> "LinExpr":
        return cls(None, value)

    def is_constant(self) -> bool:
        return not self.coeffs

    def __add__(self, other):
        if isinstance(other, (int, float)):
            return LinExpr(self.coeffs, self.const + other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0.0) + v
        return LinExpr(out, self.const + other.const)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            return LinExpr(self.coeffs, self.const - other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return LinExpr({k: -v for k, v in self.coeffs.items()}, -self.const)

    def __mul__(self, factor: float):
        return LinExpr(
            {k: v * factor for k, v in self.coeffs.items()}, self.const * factor
        )

    __rmul__ = __mul__

    def value(self, w: np.ndarray) -> float:
        return self.const + sum(v * w[k] for k, v in self.coeffs.items())

    def __repr__(self):
        return f"LinExpr({self.coeffs}, {self.const})"


class PolyExpr:
    """Polynomial with LinExpr coefficients; immutable by convention."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Exponents, LinExpr] | None = None):
        self.nvars = nvars
        self.terms: dict[Exponents, LinExpr] = {}
        if terms:
            for exps, lin in terms.items():
                if lin.coeffs or lin.const != 0.0:
                    self.terms[tuple(exps)] = lin

    @classmethod
    def zero(cls, nvars: int) -> "PolyExpr":
        return cls(nvars)

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "PolyExpr":
        return cls(p.nvars, {e: LinExpr.constant(c) for e, c in p.terms.items()})

    @classmethod
    def from_linexpr(cls, lin: LinExpr, nvars: int) -> "PolyExpr":
        return cls(nvars, {(0,) * nvars: lin})

    def __add__(self, other: "PolyExpr") -> "PolyExpr":
        out = dict(self.terms)
        for exps, lin in other.terms.items():
            out[exps] = out[exps] + lin if exps in out else lin
        return PolyExpr(self.nvars, out)

    def __sub__(self, other: "PolyExpr") -> "PolyExpr":
        return self + (-other)

    def __neg__(self) -> "PolyExpr":
        return PolyExpr(self.nvars, {e: -lin for e, lin in self.terms.items()})

    def scale(self, factor: float) -> "PolyExpr":
        return PolyExpr(self.nvars, {e: lin * factor for e, lin in self.terms.items()})

    def mul_poly(self, p: Polynomial) -> "PolyExpr":
        """Multiply by a numeric polynomial."""
        out: dict[Exponents, LinExpr] = {}
        for e1, lin in self.terms.items():
            for e2, c in p.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                contrib = lin * c
                out[key] = out[key] + contrib if key in out else contrib
        return PolyExpr(self.nvars, out)

    def mul_monomial(self, exps: Exponents, coeff: float = 1.0) -> "PolyExpr":
        out = {}
        for e, lin in self.terms.items():
            out[tuple(a + b for a, b in zip(e, exps))] = lin * coeff
        return PolyExpr(self.nvars, out)

    def extend(self, extra_vars: int) -> "PolyExpr":
        """Embed into a ring with extra trailing variables."""
        pad = (0,) * extra_vars
        return PolyExpr(
            self.nvars + extra_vars, {e + pad: lin for e, lin in self.terms.items()}
        )

    def constant_part(self) -> LinExpr:
        return self.terms.get((0,) * self.nvars, LinExpr.constant(0.0))

    def sorted_items(self) -> list[tuple[Exponents, LinExpr]]:
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))

    def to_polynomial(self, w: np.ndarray) -> Polynomial:
        return Polynomial(self.nvars, {e: lin.value(w) for e, lin in self.terms.items()})

    def __repr__(self):
        return f"PolyExpr({len(self.terms)} terms, nvars={self.nvars})"


def poly_expr_matrix(entries) -> list[list[PolyExpr]]:
    """Normalize a 2D nested sequence into lists of PolyExpr."""
    return [list(row) for row in entries]


def symmetrize(entries: list[list[PolyExpr]]) -> list[list[PolyExpr]]:
    size = len(entries)
    out = [[None] * size for _ in range(size)]
    for i in range(size):
        for j in range(size):
            out[i][j] = (entries[i][j] + entries[j][i]).scale(0.5)
    return out


def poly_times_lin(p: Polynomial, lin: LinExpr) -> PolyExpr:
    """Numeric polynomial times a single affine coefficient."""
    return PolyExpr(p.nvars, {e: lin * c for e, c in p.terms.items()})


def num_matmul(mat: np.ndarray, pe: list[list[PolyExpr]]) -> list[list[PolyExpr]]:
    """Numeric matrix times PolyExpr matrix."""
    mat = np.asarray(mat, dtype=float)
    rows, inner = mat.shape
    cols = len(pe[0])
    nvars = pe[0][0].nvars
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = PolyExpr.zero(nvars)
            for k in range(inner):
                if mat[i, k]:
                    acc = acc + pe[k][j].scale(mat[i, k])
            row.append(acc)
        out.append(row)
    return out


def matpoly_matmul(mp, pe: list[list[PolyExpr]]) -> list[list[PolyExpr]]:
    """Numeric MatrixPolynomial times PolyExpr matrix."""
    cols = len(pe[0])
    nvars = pe[0][0].nvars
    out = []
    for i in range(mp.rows):
        row = []
        for j in range(cols):
            acc = PolyExpr.zero(nvars)
            for k in range(mp.cols):
                entry = mp.entry(i, k)
                if entry.terms:
                    acc = acc + pe[k][j].mul_poly(entry)
            row.append(acc)
        out.append(row)
    return out


def pe_transpose(pe: list[list[PolyExpr]]) -> list[list[PolyExpr]]:
    return [list(col) for col in zip(*pe)]


def lin_matrix_to_pe(mat: list[list[LinExpr]], nvars: int) -> list[list[PolyExpr]]:
    return [[PolyExpr.from_linexpr(e, nvars) for e in row] for row in mat]
