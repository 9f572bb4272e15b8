"""Embedded HTTP service exposing synthesis, verification, and the catalog.

Stateless JSON API; taxonomy errors surface verbatim as 422 payloads.  When
a built UI directory is available its files are served at the root.
"""

from __future__ import annotations

import json
import threading
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .errors import UNKNOWN_ERROR, CertSynthError
from .service import RequestShapeError, request_from_payload, synthesis_envelope

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


def _benchmark_listing() -> list[dict]:
    from .bench import catalog

    out = []
    for model in catalog():
        out.append(
            {
                "name": model.name,
                "system_class": model.system_class,
                "n": model.n_states,
                "m": model.n_inputs,
                "T": model.default_T,
                "safety_T": model.safety_T or model.default_T,
                "monomials": model.basis.to_string() if model.basis else None,
                "spec": model.default_spec.to_json() if model.default_spec else None,
                "stability": model.in_stability_suite,
                "safety": model.in_safety_suite,
            }
        )
    return out


def _verify_from_payload(payload: dict) -> dict:
    from .data import TrajectoryData
    from .regions import SafetySpec
    from .service import box_from_payload, matrix_from_payload
    from .synth import certificate_from_json
    from .verify import verify_certificate

    report = payload.get("certificate")
    if report is None:
        raise RequestShapeError("missing 'certificate'")
    cert_payload = report.get("certificate", report)
    cert = certificate_from_json(cert_payload)
    meta = report.get("request", {})
    time_domain = payload.get("time_domain") or (
        "continuous" if cert.system_class.startswith("ct") else "discrete"
    )
    data = TrajectoryData(
        u0=matrix_from_payload(payload["u0"]),
        x0=matrix_from_payload(payload["x0"]),
        x1=matrix_from_payload(payload["x1"]),
        time_domain=time_domain,
    )
    spec = None
    source = payload if payload.get("state_space") else meta
    if source.get("state_space") and source.get("initial_set") and source.get("unsafe_sets"):
        spec = SafetySpec(
            state_space=box_from_payload(source["state_space"]),
            initial=box_from_payload(source["initial_set"]),
            unsafe=tuple(box_from_payload(b) for b in source["unsafe_sets"]),
        )
    if cert.kind == "CBC" and spec is None:
        raise RequestShapeError("verifying a CBC needs the region specification")
    result = verify_certificate(
        cert,
        data,
        spec=spec,
        samples=int(payload.get("samples", 10_000)),
        seed=int(payload.get("seed", 0)),
    )
    return result.to_json()


class ApiHandler(BaseHTTPRequestHandler):
    server_version = "certsynth"
    solver_gate: threading.Semaphore = threading.Semaphore(2)
    static_dir: Path | None = None
    quiet = True

    def log_message(self, fmt, *args):  # noqa: N802 (stdlib naming)
        if not self.quiet:
            super().log_message(fmt, *args)

    # ---------------- plumbing ----------------

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, sort_keys=True).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b"{}"
        try:
            payload = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            raise RequestShapeError("request body must be JSON") from None
        if not isinstance(payload, dict):
            raise RequestShapeError("request body must be a JSON object")
        return payload

    def _serve_static(self, path: str) -> None:
        root = self.static_dir
        if root is None:
            self._send_json(HTTPStatus.NOT_FOUND, {"error": "not found"})
            return
        rel = path.lstrip("/") or "index.html"
        target = (root / rel).resolve()
        if not str(target).startswith(str(root.resolve())) or not target.is_file():
            target = root / "index.html"
            if not target.is_file():
                self._send_json(HTTPStatus.NOT_FOUND, {"error": "not found"})
                return
        body = target.read_bytes()
        self.send_response(HTTPStatus.OK)
        self.send_header(
            "Content-Type", _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        )
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    # ---------------- routes ----------------

    def do_OPTIONS(self):  # noqa: N802
        self.send_response(HTTPStatus.NO_CONTENT)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def do_GET(self):  # noqa: N802
        if self.path == "/api/health":
            self._send_json(HTTPStatus.OK, {"status": "ok"})
        elif self.path == "/api/benchmarks":
            self._send_json(HTTPStatus.OK, {"benchmarks": _benchmark_listing()})
        else:
            self._serve_static(self.path.split("?", 1)[0])

    def do_POST(self):  # noqa: N802
        try:
            payload = self._read_body()
            if self.path == "/api/synthesize":
                with self.solver_gate:
                    req = request_from_payload(payload)
                    envelope, _ = synthesis_envelope(req)
                self._send_json(HTTPStatus.OK, envelope)
            elif self.path == "/api/verify":
                with self.solver_gate:
                    report = _verify_from_payload(payload)
                self._send_json(HTTPStatus.OK, report)
            else:
                self._send_json(HTTPStatus.NOT_FOUND, {"error": "not found"})
        except CertSynthError as exc:
            self._send_json(
                HTTPStatus.UNPROCESSABLE_ENTITY,
                {"error": str(exc), "detail": type(exc).__name__},
            )
        except RequestShapeError as exc:
            self._send_json(HTTPStatus.BAD_REQUEST, {"error": str(exc)})
        except Exception as exc:  # noqa: BLE001 - generic taxonomy catch-all
            self._send_json(
                HTTPStatus.INTERNAL_SERVER_ERROR,
                {"error": UNKNOWN_ERROR, "detail": f"{type(exc).__name__}: {exc}"},
            )


def make_server(
    bind: str = "127.0.0.1",
    port: int = 8000,
    max_concurrent: int = 2,
    static_dir: str | None = None,
) -> ThreadingHTTPServer:
    handler = type(
        "BoundApiHandler",
        (ApiHandler,),
        {
            "solver_gate": threading.Semaphore(max_concurrent),
            "static_dir": _resolve_static(static_dir),
        },
    )
    return ThreadingHTTPServer((bind, port), handler)


def _resolve_static(static_dir: str | None) -> Path | None:
    if static_dir:
        path = Path(static_dir)
        return path if path.is_dir() else None
    bundled = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
    return bundled if bundled.is_dir() else None


def serve(
    bind: str = "127.0.0.1",
    port: int = 8000,
    max_concurrent: int = 2,
    static_dir: str | None = None,
) -> int:
    try:
        httpd = make_server(bind, port, max_concurrent, static_dir)
    except OSError as exc:
        print(f"cannot bind {bind}:{port}: {exc}", flush=True)
        return 1
    actual_port = httpd.server_address[1]
    print(f"serving on http://{bind}:{actual_port}", flush=True)
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
    return 0
