"""Multivariate polynomial and matrix-polynomial algebra.

Coefficients are 64-bit floats; exponent bookkeeping is exact.  All types
are immutable after construction and all operations are pure functions.
Variables are always named x1..xn.  The text grammar (``*`` multiplies,
``**`` raises, entries split on ``;``) is both the input and the output
grammar for printed certificates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    MonomialParseError,
    MonomialSeparatorError,
    MonomialVariableError,
    ThetaConstructionError,
    ThetaIdentityError,
    ThetaShapeError,
)

Exponents = tuple[int, ...]


def grlex_key(exponents: Exponents) -> tuple:
    """Graded lexicographic sort key with x1 ranked before x2 before ..."""
    return (sum(exponents), tuple(-e for e in exponents))


@dataclass(frozen=True)
class Monomial:
    """A power product x1**e1 * ... * xn**en."""

    exponents: Exponents

    def __post_init__(self):
        if any(e < 0 for e in self.exponents):
            raise ValueError("negative exponent")

    @property
    def nvars(self) -> int:
        return len(self.exponents)

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def evaluate(self, point: Sequence[float]) -> float:
        v = 1.0
        for e, xi in zip(self.exponents, point):
            if e:
                v *= xi**e
        return v

    def to_string(self) -> str:
        parts = []
        for i, e in enumerate(self.exponents):
            if e == 1:
                parts.append(f"x{i + 1}")
            elif e > 1:
                parts.append(f"x{i + 1}**{e}")
        return "*".join(parts) if parts else "1"

    def __repr__(self):
        return f"Monomial({self.to_string()})"


def _fmt_coeff(c: float) -> str:
    if c == int(c) and abs(c) < 1e15:
        return str(int(c))
    return repr(float(c))


class Polynomial:
    """Sparse polynomial: map from exponent tuple to nonzero coefficient."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: dict[Exponents, float] | None = None):
        self.nvars = nvars
        clean: dict[Exponents, float] = {}
        if terms:
            for exps, c in terms.items():
                if len(exps) != nvars:
                    raise ValueError("exponent tuple length mismatch")
                if c != 0.0:
                    clean[tuple(exps)] = float(c)
        self.terms = clean

    # construction helpers
    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls(nvars)

    @classmethod
    def constant(cls, value: float, nvars: int) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, index: int, nvars: int) -> "Polynomial":
        exps = [0] * nvars
        exps[index] = 1
        return cls(nvars, {tuple(exps): 1.0})

    @classmethod
    def from_monomial(cls, mono: Monomial, coeff: float = 1.0) -> "Polynomial":
        return cls(mono.nvars, {mono.exponents: coeff})

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return (
            isinstance(other, Polynomial)
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        out = dict(self.terms)
        for exps, c in other.terms.items():
            out[exps] = out.get(exps, 0.0) + c
        return Polynomial(self.nvars, out)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        out = dict(self.terms)
        for exps, c in other.terms.items():
            out[exps] = out.get(exps, 0.0) - c
        return Polynomial(self.nvars, out)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.nvars, {e: -c for e, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(other)
        out: dict[Exponents, float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0.0) + c1 * c2
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__

    def scale(self, factor: float) -> "Polynomial":
        return Polynomial(self.nvars, {e: c * factor for e, c in self.terms.items()})

    def diff(self, var: int) -> "Polynomial":
        out: dict[Exponents, float] = {}
        for exps, c in self.terms.items():
            e = exps[var]
            if e:
                nexps = list(exps)
                nexps[var] = e - 1
                key = tuple(nexps)
                out[key] = out.get(key, 0.0) + c * e
        return Polynomial(self.nvars, out)

    def evaluate(self, point: Sequence[float]) -> float:
        total = 0.0
        for exps, c in self.terms.items():
            v = c
            for e, xi in zip(exps, point):
                if e:
                    v *= xi**e
            total += v
        return total

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at many points; ``points`` is n x K, returns length-K array."""
        points = np.asarray(points, dtype=float)
        total = np.zeros(points.shape[1])
        for exps, c in self.terms.items():
            v = np.full(points.shape[1], c)
            for i, e in enumerate(exps):
                if e:
                    v = v * points[i] ** e
            total += v
        return total

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def pruned(self, rel_tol: float = 1e-12) -> "Polynomial":
        """Drop coefficients below rel_tol times the largest magnitude."""
        cutoff = rel_tol * self.max_abs_coeff()
        return Polynomial(
            self.nvars, {e: c for e, c in self.terms.items() if abs(c) > cutoff}
        )

    def sorted_terms(self) -> list[tuple[Exponents, float]]:
        return sorted(self.terms.items(), key=lambda item: grlex_key(item[0]))

    def to_string(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps, c in self.sorted_terms():
            mono = Monomial(exps)
            if mono.degree == 0:
                text = _fmt_coeff(c)
            elif c == 1.0:
                text = mono.to_string()
            elif c == -1.0:
                text = f"-{mono.to_string()}"
            else:
                text = f"{_fmt_coeff(c)}*{mono.to_string()}"
            parts.append(text)
        out = parts[0]
        for text in parts[1:]:
            out += f" - {text[1:]}" if text.startswith("-") else f" + {text}"
        return out

    def __repr__(self):
        return f"Polynomial({self.to_string()})"


class MonomialBasis:
    """Ordered list of distinct monomials defining the state lift."""

    __slots__ = ("monomials", "nvars")

    def __init__(self, monomials: Sequence[Monomial], nvars: int):
        monos = list(monomials)
        if not monos:
            raise ValueError("basis must contain at least one monomial")
        if any(m.nvars != nvars for m in monos):
            raise ValueError("monomial arity mismatch")
        if len({m.exponents for m in monos}) != len(monos):
            raise MonomialParseError()
        self.monomials = monos
        self.nvars = nvars

    def __len__(self):
        return len(self.monomials)

    def __iter__(self):
        return iter(self.monomials)

    def __getitem__(self, i):
        return self.monomials[i]

    def __eq__(self, other):
        return (
            isinstance(other, MonomialBasis)
            and self.nvars == other.nvars
            and [m.exponents for m in self.monomials]
            == [m.exponents for m in other.monomials]
        )

    @property
    def degree(self) -> int:
        return max(m.degree for m in self.monomials)

    def evaluate(self, point: Sequence[float]) -> np.ndarray:
        return np.array([m.evaluate(point) for m in self.monomials])

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Lift n x K sample columns to N x K."""
        points = np.asarray(points, dtype=float)
        rows = []
        for m in self.monomials:
            v = np.ones(points.shape[1])
            for i, e in enumerate(m.exponents):
                if e:
                    v = v * points[i] ** e
            rows.append(v)
        return np.vstack(rows)

    def to_string(self) -> str:
        return "; ".join(m.to_string() for m in self.monomials)

    def __repr__(self):
        return f"MonomialBasis([{self.to_string()}])"


class MatrixPolynomial:
    """Dense matrix with Polynomial entries, row-major."""

    __slots__ = ("rows", "cols", "entries", "nvars")

    def __init__(self, rows: int, cols: int, entries: Sequence[Polynomial]):
        entries = list(entries)
        if len(entries) != rows * cols:
            raise ValueError("entry count mismatch")
        nvars = entries[0].nvars
        if any(p.nvars != nvars for p in entries):
            raise ValueError("mixed arities")
        self.rows = rows
        self.cols = cols
        self.entries = entries
        self.nvars = nvars

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Polynomial]]) -> "MatrixPolynomial":
        flat = [p for row in rows for p in row]
        return cls(len(rows), len(rows[0]), flat)

    @classmethod
    def from_array(cls, arr: np.ndarray, nvars: int) -> "MatrixPolynomial":
        arr = np.asarray(arr, dtype=float)
        entries = [Polynomial.constant(v, nvars) for v in arr.ravel()]
        return cls(arr.shape[0], arr.shape[1], entries)

    def entry(self, i: int, j: int) -> Polynomial:
        return self.entries[i * self.cols + j]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def degree(self) -> int:
        return max(p.degree for p in self.entries)

    def transpose(self) -> "MatrixPolynomial":
        out = [self.entry(i, j) for j in range(self.cols) for i in range(self.rows)]
        return MatrixPolynomial(self.cols, self.rows, out)

    def __add__(self, other: "MatrixPolynomial") -> "MatrixPolynomial":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return MatrixPolynomial(
            self.rows, self.cols, [a + b for a, b in zip(self.entries, other.entries)]
        )

    def __neg__(self) -> "MatrixPolynomial":
        return MatrixPolynomial(self.rows, self.cols, [-p for p in self.entries])

    def matmul_poly(self, other: "MatrixPolynomial") -> "MatrixPolynomial":
        if self.cols != other.rows:
            raise ValueError("inner dimension mismatch")
        out = []
        for i in range(self.rows):
            for j in range(other.cols):
                acc = Polynomial.zero(self.nvars)
                for k in range(self.cols):
                    acc = acc + self.entry(i, k) * other.entry(k, j)
                out.append(acc)
        return MatrixPolynomial(self.rows, other.cols, out)

    def matmul_left(self, mat: np.ndarray) -> "MatrixPolynomial":
        """Numeric matrix times self."""
        mat = np.asarray(mat, dtype=float)
        if mat.shape[1] != self.rows:
            raise ValueError("inner dimension mismatch")
        out = []
        for i in range(mat.shape[0]):
            for j in range(self.cols):
                acc = Polynomial.zero(self.nvars)
                for k in range(self.rows):
                    if mat[i, k]:
                        acc = acc + self.entry(k, j).scale(mat[i, k])
                out.append(acc)
        return MatrixPolynomial(mat.shape[0], self.cols, out)

    def matmul_right(self, mat: np.ndarray) -> "MatrixPolynomial":
        """Self times numeric matrix."""
        mat = np.asarray(mat, dtype=float)
        if self.cols != mat.shape[0]:
            raise ValueError("inner dimension mismatch")
        out = []
        for i in range(self.rows):
            for j in range(mat.shape[1]):
                acc = Polynomial.zero(self.nvars)
                for k in range(self.cols):
                    if mat[k, j]:
                        acc = acc + self.entry(i, k).scale(mat[k, j])
                out.append(acc)
        return MatrixPolynomial(self.rows, mat.shape[1], out)

    def evaluate(self, point: Sequence[float]) -> np.ndarray:
        if len(point) != self.nvars:
            raise ValueError("dimension mismatch")
        vals = [p.evaluate(point) for p in self.entries]
        return np.array(vals).reshape(self.rows, self.cols)

    def max_abs_coeff(self) -> float:
        return max(p.max_abs_coeff() for p in self.entries)

    def to_strings(self) -> list[list[str]]:
        return [
            [self.entry(i, j).to_string() for j in range(self.cols)]
            for i in range(self.rows)
        ]

    def __repr__(self):
        return f"MatrixPolynomial({self.rows}x{self.cols})"


def evaluate(obj, point: Sequence[float]):
    """Evaluate a Polynomial or MatrixPolynomial at a point."""
    if isinstance(obj, Polynomial):
        if len(point) != obj.nvars:
            raise ValueError("dimension mismatch")
        return obj.evaluate(point)
    if isinstance(obj, MatrixPolynomial):
        return obj.evaluate(point)
    raise TypeError(f"cannot evaluate {type(obj)!r}")


_MONO_RE = re.compile(r"^x(\d+)(?:\*\*(\d+))?(?:\*x(\d+)(?:\*\*(\d+))?)*$")
_FACTOR_RE = re.compile(r"x(\d+)(?:\*\*(\d+))?")


def _parse_monomial_entry(entry: str, nvars: int) -> Monomial:
    compact = re.sub(r"\s+", "", entry)
    if not compact:
        raise MonomialParseError()
    if not _MONO_RE.match(compact):
        # distinguish out-of-range variables referenced in well-formed factors
        raise MonomialParseError()
    exps = [0] * nvars
    for match in _FACTOR_RE.finditer(compact):
        index = int(match.group(1))
        if index < 1 or index > nvars:
            raise MonomialVariableError()
        power = int(match.group(2)) if match.group(2) else 1
        exps[index - 1] += power
    return Monomial(tuple(exps))


def parse_monomials(text: str, nvars: int) -> MonomialBasis:
    """Parse a semicolon-separated monomial list such as ``"x1; x2; x1*x2"``."""
    if not isinstance(text, str) or not text.strip():
        raise MonomialParseError()
    if "," in text:
        raise MonomialSeparatorError()
    entries = [e for e in text.split(";")]
    if any(not e.strip() for e in entries):
        raise MonomialParseError()
    monos = [_parse_monomial_entry(e, nvars) for e in entries]
    return MonomialBasis(monos, nvars)


_NUMBER = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_TERM_FACTOR = rf"(?:x\d+(?:\*\*\d+)?|{_NUMBER})"
_TERM_RE = re.compile(rf"^{_TERM_FACTOR}(?:\*{_TERM_FACTOR})*$")


def parse_polynomial(text: str, nvars: int) -> Polynomial:
    """Parse simple polynomial text: signed sums of ``coeff*monomial`` terms.

    Used for user-supplied Theta entries; the monomial grammar matches
    ``parse_monomials``, coefficients may use scientific notation.
    """
    compact = re.sub(r"\s+", "", str(text))
    if not compact:
        raise MonomialParseError()
    # split into signed terms; a +/- right after e/E continues an exponent
    terms: list[tuple[float, str]] = []
    sign = 1.0
    if compact[0] in "+-":
        sign = -1.0 if compact[0] == "-" else 1.0
        compact = compact[1:]
    buf = ""
    for ch in compact:
        if ch in "+-" and not (buf and buf[-1] in "eE" and buf[:-1]):
            terms.append((sign, buf))
            sign = -1.0 if ch == "-" else 1.0
            buf = ""
        else:
            buf += ch
    terms.append((sign, buf))
    poly = Polynomial.zero(nvars)
    for sgn, term in terms:
        if not term or not _TERM_RE.match(term):
            raise MonomialParseError()
        coeff = sgn
        exps = [0] * nvars
        for factor in re.findall(rf"{_TERM_FACTOR}", term):
            if factor.startswith("x"):
                m = _FACTOR_RE.fullmatch(factor)
                index = int(m.group(1))
                if index < 1 or index > nvars:
                    raise MonomialVariableError()
                exps[index - 1] += int(m.group(2)) if m.group(2) else 1
            else:
                coeff *= float(factor)
        poly = poly + Polynomial(nvars, {tuple(exps): coeff})
    return poly


def jacobian(basis: MonomialBasis) -> MatrixPolynomial:
    """Exact symbolic Jacobian of the lift; entry (i, j) = d basis[i] / d xj."""
    n = basis.nvars
    entries = []
    for mono in basis:
        p = Polynomial.from_monomial(mono)
        for j in range(n):
            entries.append(p.diff(j))
    return MatrixPolynomial(len(basis), n, entries)


def theta_autofill(basis: MonomialBasis) -> MatrixPolynomial:
    """Factor the lift as Theta(x) @ x.

    Deterministic tie-break: each monomial is divided by its lowest-index
    variable with positive exponent and the quotient goes in that column.
    """
    n = basis.nvars
    entries = []
    for mono in basis:
        if mono.degree == 0:
            raise ThetaConstructionError()
        pivot = next(i for i, e in enumerate(mono.exponents) if e > 0)
        quotient = list(mono.exponents)
        quotient[pivot] -= 1
        row = [Polynomial.zero(n) for _ in range(n)]
        row[pivot] = Polynomial(n, {tuple(quotient): 1.0})
        entries.extend(row)
    return MatrixPolynomial(len(basis), n, entries)


def validate_theta(theta: MatrixPolynomial, basis: MonomialBasis) -> None:
    """Check shape (N, n) and the symbolic identity Theta(x) @ x == M(x)."""
    n_monomials = len(basis)
    n_states = basis.nvars
    if theta.shape != (n_monomials, n_states):
        raise ThetaShapeError(n_monomials, n_states)
    for i, mono in enumerate(basis):
        acc = Polynomial.zero(n_states)
        for j in range(n_states):
            acc = acc + theta.entry(i, j) * Polynomial.variable(j, n_states)
        if acc != Polynomial.from_monomial(mono):
            raise ThetaIdentityError()


def theta_from_strings(rows: Sequence[Sequence[str]], nvars: int) -> MatrixPolynomial:
    """Build a Theta matrix from text entries (numbers or polynomial strings)."""
    entries = []
    for row in rows:
        for cell in row:
            entries.append(parse_polynomial(str(cell), nvars))
    return MatrixPolynomial(len(rows), len(rows[0]), entries)
