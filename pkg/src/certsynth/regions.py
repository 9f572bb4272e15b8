"""Hyperrectangular regions of interest and their polynomial encodings."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpacesError
from .poly import Polynomial


@dataclass(frozen=True)
class HyperRectangle:
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        if len(self.lower) != len(self.upper) or not self.lower:
            raise InvalidSpacesError()
        if any(lo >= up for lo, up in zip(self.lower, self.upper)):
            raise InvalidSpacesError()

    @property
    def dim(self) -> int:
        return len(self.lower)

    def contains(self, point) -> bool:
        return all(lo <= x <= up for lo, x, up in zip(self.lower, point, self.upper))

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Uniform samples as an n x count matrix."""
        lo = np.array(self.lower)
        up = np.array(self.upper)
        return rng.uniform(lo[:, None], up[:, None], size=(self.dim, count))

    def intersects(self, other: "HyperRectangle") -> bool:
        return all(
            lo <= oup and olo <= up
            for lo, up, olo, oup in zip(self.lower, self.upper, other.lower, other.upper)
        )

    def to_json(self) -> dict:
        return {"lower": list(self.lower), "upper": list(self.upper)}

    @classmethod
    def from_json(cls, payload: dict) -> "HyperRectangle":
        try:
            return cls(tuple(payload["lower"]), tuple(payload["upper"]))
        except InvalidSpacesError:
            raise
        except Exception:
            raise InvalidSpacesError() from None


@dataclass(frozen=True)
class SafetySpec:
    """State space X, initial set X_I, and one or more unsafe sets X_O,i."""

    state_space: HyperRectangle
    initial: HyperRectangle
    unsafe: tuple[HyperRectangle, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "unsafe", tuple(self.unsafe))
        if not self.unsafe:
            raise InvalidSpacesError()

    @property
    def dim(self) -> int:
        return self.state_space.dim

    def to_json(self) -> dict:
        return {
            "state_space": self.state_space.to_json(),
            "initial_set": self.initial.to_json(),
            "unsafe_sets": [box.to_json() for box in self.unsafe],
        }

    @classmethod
    def from_json(cls, payload: dict) -> "SafetySpec":
        try:
            spec = cls(
                state_space=HyperRectangle.from_json(payload["state_space"]),
                initial=HyperRectangle.from_json(payload["initial_set"]),
                unsafe=tuple(
                    HyperRectangle.from_json(b) for b in payload["unsafe_sets"]
                ),
            )
        except InvalidSpacesError:
            raise
        except Exception:
            raise InvalidSpacesError() from None
        validate_spec(spec)
        return spec


def to_polynomials(box: HyperRectangle) -> list[Polynomial]:
    """Slab encoding g_i(x) = (x_i - l_i) * (u_i - x_i), nonnegative exactly on the box."""
    n = box.dim
    out = []
    for i, (lo, up) in enumerate(zip(box.lower, box.upper)):
        xi = Polynomial.variable(i, n)
        out.append((xi - Polynomial.constant(lo, n)) * (Polynomial.constant(up, n) - xi))
    return out


def validate_spec(spec: SafetySpec, n_states: int | None = None) -> None:
    """Reject dimension mismatches; bound ordering is enforced on construction."""
    dim = spec.state_space.dim
    if n_states is not None and dim != n_states:
        raise InvalidSpacesError()
    if spec.initial.dim != dim or any(box.dim != dim for box in spec.unsafe):
        raise InvalidSpacesError()
