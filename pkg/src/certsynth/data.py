"""Trajectory ingestion, lifted data construction, and the rank gate.

Matrices are stored rows = dimensions, columns = time samples.  A single
input-state trajectory is the triple (u0, x0, x1) where x1 holds successor
states in discrete time and state derivatives in continuous time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FileParseError, RankDeficientError, SampleCountError
from .poly import MonomialBasis

RANK_RTOL = 1e-9


@dataclass(frozen=True)
class TrajectoryData:
    """Raw data matrices u0 (m x T), x0 (n x T), x1 (n x T)."""

    u0: np.ndarray
    x0: np.ndarray
    x1: np.ndarray
    time_domain: str  # "continuous" | "discrete"
    tau: float | None = None  # sampling period, continuous only

    def __post_init__(self):
        for name in ("u0", "x0", "x1"):
            object.__setattr__(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=float)))
        if self.time_domain not in ("continuous", "discrete"):
            raise ValueError(f"bad time domain {self.time_domain!r}")
        if not (self.u0.shape[1] == self.x0.shape[1] == self.x1.shape[1]):
            raise ValueError("u0, x0, x1 must share the sample count T")
        if self.x0.shape[0] != self.x1.shape[0]:
            raise ValueError("x0 and x1 must share the state dimension n")
        if self.x0.shape[1] < 1:
            raise ValueError("need at least one sample")

    @property
    def n_states(self) -> int:
        return self.x0.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.u0.shape[0]

    @property
    def n_samples(self) -> int:
        return self.x0.shape[1]


@dataclass(frozen=True)
class LiftedData:
    """Monomial lift of the state samples, N x T."""

    n0: np.ndarray


def _parse_csv_like(text: str, sep: str | None) -> np.ndarray:
    rows = []
    for line in text.strip().splitlines():
        line = line.strip()
        if not line:
            continue
        cells = line.split(",") if sep == "," else line.split()
        rows.append([float(c) for c in cells])
    if not rows:
        raise ValueError("empty")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("ragged")
    return np.array(rows, dtype=float)


def load_matrix(source, format: str) -> np.ndarray:
    """Load a matrix from a path, bytes, or text in csv, txt, or json format.

    Rows are dimensions and columns are time samples.  Any malformed or
    non-finite content raises the uploaded-file parse error.
    """
    if format not in ("csv", "txt", "json"):
        raise FileParseError()
    try:
        if isinstance(source, Path):
            text = source.read_text()
        elif isinstance(source, bytes):
            text = source.decode("utf-8")
        elif isinstance(source, str) and "\n" not in source and Path(source).is_file():
            text = Path(source).read_text()
        else:
            text = str(source)
        if format == "json":
            payload = json.loads(text)
            arr = np.array(payload, dtype=float)
            if arr.ndim == 1:
                arr = arr.reshape(1, -1)
            if arr.ndim != 2:
                raise ValueError("not a matrix")
        else:
            arr = _parse_csv_like(text, "," if format == "csv" else None)
        if arr.size == 0 or not np.all(np.isfinite(arr)):
            raise ValueError("non-finite entries")
        return arr
    except FileParseError:
        raise
    except Exception:
        raise FileParseError() from None


def load_matrix_path(path) -> np.ndarray:
    """Load a matrix inferring the format from the file suffix."""
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix not in ("csv", "txt", "json"):
        raise FileParseError()
    try:
        text = Path(path).read_text()
    except OSError:
        raise FileParseError() from None
    return load_matrix(text, suffix)


def build_n0(x0: np.ndarray, basis: MonomialBasis) -> LiftedData:
    """Columnwise monomial lift of the state samples."""
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    if basis.nvars != x0.shape[0]:
        raise ValueError("basis arity does not match the state dimension")
    return LiftedData(n0=basis.evaluate_many(x0))


def check_rank(matrix: np.ndarray, kind: str) -> None:
    """Persistent-excitation gate: T > rows and numerically full row-rank.

    ``kind`` is "lifted" for n0 matrices and "linear-state" for x0; the two
    produce distinct error strings.
    """
    if kind not in ("lifted", "linear-state"):
        raise ValueError(f"bad kind {kind!r}")
    key = "lifted" if kind == "lifted" else "linear"
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    r, t = matrix.shape
    if t <= r:
        raise SampleCountError(key)
    sigma = np.linalg.svd(matrix, compute_uv=False)
    rank = int(np.sum(sigma > RANK_RTOL * sigma[0])) if sigma[0] > 0 else 0
    if rank < r:
        raise RankDeficientError(key)
