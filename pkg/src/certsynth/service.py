"""Request construction and report assembly shared by the CLI and the HTTP API."""

from __future__ import annotations

import json

import numpy as np

from .data import TrajectoryData, load_matrix
from .errors import FileParseError
from .poly import parse_monomials, theta_from_strings
from .regions import HyperRectangle, SafetySpec, validate_spec
from .synth import (
    Certificate,
    SynthesisRequest,
    certificate_to_json,
    format_certificate,
    synthesize,
)


class RequestShapeError(ValueError):
    """Malformed request payload (usage error, not a taxonomy error)."""


def matrix_from_payload(value) -> np.ndarray:
    """Accept an inline array of arrays or uploaded file content."""
    if isinstance(value, dict):
        content = value.get("content")
        fmt = value.get("format", "csv")
        if content is None:
            raise RequestShapeError("matrix upload needs a 'content' field")
        return load_matrix(str(content), fmt)
    if isinstance(value, str):
        return load_matrix(value, "json" if value.lstrip().startswith("[") else "csv")
    try:
        arr = np.array(value, dtype=float)
    except Exception:
        raise FileParseError() from None
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or not np.all(np.isfinite(arr)):
        raise FileParseError()
    return arr


def box_from_payload(value) -> HyperRectangle:
    if isinstance(value, str):
        value = json.loads(value)
    return HyperRectangle.from_json(value)


def request_from_payload(payload: dict) -> SynthesisRequest:
    """Build a SynthesisRequest from the wire/CLI payload."""
    mode = payload.get("mode")
    time_domain = payload.get("time_domain")
    model_kind = payload.get("model_kind")
    if mode not in ("stability", "safety"):
        raise RequestShapeError("mode must be 'stability' or 'safety'")
    if time_domain not in ("continuous", "discrete"):
        raise RequestShapeError("time_domain must be 'continuous' or 'discrete'")
    if model_kind not in ("linear", "polynomial"):
        raise RequestShapeError("model_kind must be 'linear' or 'polynomial'")
    for key in ("u0", "x0", "x1"):
        if key not in payload:
            raise RequestShapeError(f"missing data matrix {key!r}")

    u0 = matrix_from_payload(payload["u0"])
    x0 = matrix_from_payload(payload["x0"])
    x1 = matrix_from_payload(payload["x1"])
    try:
        data = TrajectoryData(
            u0=u0, x0=x0, x1=x1, time_domain=time_domain, tau=payload.get("tau")
        )
    except ValueError as exc:
        raise RequestShapeError(str(exc)) from None
    n = data.n_states

    basis = None
    if model_kind == "polynomial":
        if not payload.get("monomials"):
            raise RequestShapeError("polynomial models require 'monomials'")
        basis = parse_monomials(payload["monomials"], n)

    theta = payload.get("theta")
    if isinstance(theta, (list, tuple)):
        theta = theta_from_strings(theta, n)
    elif theta is not None and theta != "auto":
        raise RequestShapeError("theta must be 'auto' or a matrix of entries")
    if theta is None and model_kind == "polynomial" and time_domain == "discrete":
        theta = "auto"

    spec = None
    if mode == "safety":
        for key in ("state_space", "initial_set", "unsafe_sets"):
            if not payload.get(key):
                raise RequestShapeError(f"safety mode requires {key!r}")
        spec = SafetySpec(
            state_space=box_from_payload(payload["state_space"]),
            initial=box_from_payload(payload["initial_set"]),
            unsafe=tuple(box_from_payload(b) for b in payload["unsafe_sets"]),
        )
        validate_spec(spec, n)

    clf_region = None
    if payload.get("clf_region"):
        clf_region = box_from_payload(payload["clf_region"])

    return SynthesisRequest(
        mode=mode,
        time_domain=time_domain,
        model_kind=model_kind,
        data=data,
        basis=basis,
        theta=theta,
        spec=spec,
        deg_h=payload.get("deg_h"),
        deg_multiplier=int(payload.get("deg_multiplier", 2)),
        epsilon=float(payload.get("epsilon", 1e-6)),
        decrease_margin=float(payload.get("decrease_margin", 0.0)),
        clf_region=clf_region,
    )


def request_echo(req: SynthesisRequest) -> dict:
    echo = {
        "mode": req.mode,
        "time_domain": req.time_domain,
        "model_kind": req.model_kind,
        "monomials": req.basis.to_string() if req.basis is not None else None,
        "deg_h": req.deg_h,
        "deg_multiplier": req.deg_multiplier,
        "epsilon": req.epsilon,
        "decrease_margin": req.decrease_margin,
    }
    if req.spec is not None:
        echo.update(req.spec.to_json())
    if req.clf_region is not None:
        echo["clf_region"] = req.clf_region.to_json()
    return echo


def synthesis_envelope(req: SynthesisRequest) -> tuple[dict, Certificate]:
    cert = synthesize(req)
    envelope = {
        "certificate": certificate_to_json(cert),
        "request": request_echo(req),
        "diagnostics": {
            "wall_time_s": cert.wall_time_s,
            **{k: _plain(v) for k, v in cert.diagnostics.items()},
        },
    }
    return envelope, cert


def _plain(value):
    if isinstance(value, (np.floating, np.integer)):
        return float(value)
    return value


def envelope_to_text(envelope: dict, cert: Certificate) -> str:
    return format_certificate(cert)


def dump_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2)
