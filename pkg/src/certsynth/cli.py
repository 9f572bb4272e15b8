"""Command-line interface: synthesize, verify, bench, serve."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import UNKNOWN_ERROR, CertSynthError
from .service import (
    RequestShapeError,
    dump_json,
    request_from_payload,
    synthesis_envelope,
)
from .synth import certificate_from_json, format_certificate


def _env_default(name: str, builtin, cast=str):
    raw = os.environ.get(name)
    if raw is None:
        return builtin
    try:
        return cast(raw)
    except ValueError:
        return builtin


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="certsynth",
        description=(
            "Data-driven synthesis of control Lyapunov functions and control "
            "barrier certificates from a single input-state trajectory."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    syn = sub.add_parser("synthesize", help="synthesize a certificate from data files")
    syn.add_argument("--mode", required=True, choices=["stability", "safety"])
    syn.add_argument("--time", required=True, choices=["continuous", "discrete"])
    syn.add_argument("--model", required=True, choices=["linear", "polynomial"])
    syn.add_argument("--x0", required=True, help="state samples file (csv/txt/json)")
    syn.add_argument("--u0", required=True, help="input samples file")
    syn.add_argument("--x1", required=True, help="successor/derivative samples file")
    syn.add_argument("--monomials", help="semicolon-separated monomials, e.g. 'x1; x2; x1*x2'")
    syn.add_argument("--theta", help="'auto' or a JSON file with matrix entries")
    syn.add_argument("--state-space", help='JSON {"lower": [...], "upper": [...]}')
    syn.add_argument("--initial-set", help="JSON bounds of the initial set")
    syn.add_argument(
        "--unsafe-set",
        action="append",
        default=[],
        help="JSON bounds of an unsafe set (repeatable)",
    )
    syn.add_argument("--deg-h", type=int, default=_env_default("CERTSYNTH_DEG_H", None, int))
    syn.add_argument(
        "--deg-mult", type=int, default=_env_default("CERTSYNTH_DEG_MULT", 2, int)
    )
    syn.add_argument(
        "--epsilon", type=float, default=_env_default("CERTSYNTH_EPSILON", 1e-6, float)
    )
    syn.add_argument("--decrease-margin", type=float, default=0.0)
    syn.add_argument("--clf-region", help="JSON bounds localizing a polynomial CLF")
    syn.add_argument("--tau", type=float, help="sampling period of continuous-time data")
    syn.add_argument("--out", help="write the report to this file")
    syn.add_argument("--format", choices=["json", "text"], default="json")
    syn.add_argument("--plot", help="render the 2-D level-set figure to this file (safety)")

    ver = sub.add_parser("verify", help="re-check a certificate by sampling")
    ver.add_argument("--certificate", required=True, help="report or certificate JSON file")
    ver.add_argument("--x0", required=True)
    ver.add_argument("--u0", required=True)
    ver.add_argument("--x1", required=True)
    ver.add_argument("--time", choices=["continuous", "discrete"])
    ver.add_argument("--samples", type=int, default=10_000)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--state-space", help="overrides the spec stored in the report")
    ver.add_argument("--initial-set")
    ver.add_argument("--unsafe-set", action="append", default=[])
    ver.add_argument("--out")

    ben = sub.add_parser("bench", help="run the benchmark suite")
    ben.add_argument("--mode", required=True, choices=["stability", "safety"])
    ben.add_argument("--models", help="comma-separated model names (default: all)")
    ben.add_argument("--seed", type=int, default=0)
    ben.add_argument("--samples", type=int, default=10_000)
    ben.add_argument("--out", help="CSV output path")
    ben.add_argument("--json", dest="json_out", help="JSON output path")
    ben.add_argument("--plot", help="render the suite wall-time figure to this file")

    srv = sub.add_parser("serve", help="serve the HTTP API and the web UI")
    srv.add_argument("--port", type=int, default=_env_default("CERTSYNTH_PORT", 8000, int))
    srv.add_argument("--bind", default=_env_default("CERTSYNTH_BIND", "127.0.0.1"))
    srv.add_argument(
        "--max-concurrent",
        type=int,
        default=_env_default("CERTSYNTH_MAX_CONCURRENT", 2, int),
        help="cap on simultaneous solver runs",
    )
    srv.add_argument("--static-dir", help="directory of built UI assets")
    return parser


def _file_payload(path: str) -> dict:
    suffix = Path(path).suffix.lower().lstrip(".") or "csv"
    return {"content": Path(path).read_text(), "format": suffix}


def _load_boxes(args) -> dict:
    payload = {}
    if args.state_space:
        payload["state_space"] = json.loads(args.state_space)
    if args.initial_set:
        payload["initial_set"] = json.loads(args.initial_set)
    if args.unsafe_set:
        payload["unsafe_sets"] = [json.loads(b) for b in args.unsafe_set]
    return payload


def cmd_synthesize(args) -> int:
    if args.model == "polynomial" and not args.monomials:
        raise RequestShapeError("--monomials is required for polynomial models")
    if args.mode == "safety" and not (
        args.state_space and args.initial_set and args.unsafe_set
    ):
        raise RequestShapeError(
            "safety mode requires --state-space, --initial-set, and --unsafe-set"
        )
    theta = None
    if args.theta:
        if args.theta == "auto":
            theta = "auto"
        else:
            theta = json.loads(Path(args.theta).read_text())
    payload = {
        "mode": args.mode,
        "time_domain": args.time,
        "model_kind": args.model,
        "x0": _file_payload(args.x0),
        "u0": _file_payload(args.u0),
        "x1": _file_payload(args.x1),
        "monomials": args.monomials,
        "theta": theta,
        "deg_h": args.deg_h,
        "deg_multiplier": args.deg_mult,
        "epsilon": args.epsilon,
        "decrease_margin": args.decrease_margin,
        "tau": args.tau,
        **_load_boxes(args),
    }
    if args.clf_region:
        payload["clf_region"] = json.loads(args.clf_region)
    req = request_from_payload(payload)
    envelope, cert = synthesis_envelope(req)
    text = dump_json(envelope) if args.format == "json" else format_certificate(cert)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    if args.plot:
        if req.spec is None or req.spec.dim != 2:
            print("plot skipped: level-set figures need a 2-D safety request", file=sys.stderr)
        else:
            from .figures import level_set_figure

            level_set_figure(cert, req.spec, args.plot)
    return 0


def cmd_verify(args) -> int:
    from .data import TrajectoryData, load_matrix_path
    from .regions import SafetySpec
    from .service import box_from_payload
    from .verify import verify_certificate

    report = json.loads(Path(args.certificate).read_text())
    cert_payload = report.get("certificate", report)
    cert = certificate_from_json(cert_payload)
    request_meta = report.get("request", {})
    time_domain = args.time or (
        "continuous" if cert.system_class.startswith("ct") else "discrete"
    )
    data = TrajectoryData(
        u0=load_matrix_path(args.u0),
        x0=load_matrix_path(args.x0),
        x1=load_matrix_path(args.x1),
        time_domain=time_domain,
    )
    spec = None
    if args.state_space and args.initial_set and args.unsafe_set:
        spec = SafetySpec(
            state_space=box_from_payload(json.loads(args.state_space)),
            initial=box_from_payload(json.loads(args.initial_set)),
            unsafe=tuple(box_from_payload(json.loads(b)) for b in args.unsafe_set),
        )
    elif {"state_space", "initial_set", "unsafe_sets"} <= request_meta.keys():
        spec = SafetySpec(
            state_space=box_from_payload(request_meta["state_space"]),
            initial=box_from_payload(request_meta["initial_set"]),
            unsafe=tuple(box_from_payload(b) for b in request_meta["unsafe_sets"]),
        )
    if cert.kind == "CBC" and spec is None:
        raise RequestShapeError("verifying a CBC needs the region specification")
    report = verify_certificate(
        cert, data, spec=spec, samples=args.samples, seed=args.seed
    )
    text = dump_json(report.to_json())
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0 if report.passed else 1


def cmd_bench(args) -> int:
    from .bench import catalog, rows_to_csv, rows_to_json, run_suite

    models = None
    if args.models:
        wanted = [name.strip() for name in args.models.split(",")]
        models = [m for m in catalog() if m.name in wanted]
        missing = set(wanted) - {m.name for m in models}
        if missing:
            raise RequestShapeError(f"unknown benchmarks: {sorted(missing)}")
    rows = run_suite(args.mode, models=models, seed=args.seed, samples=args.samples)
    csv_text = rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(csv_text)
    else:
        print(csv_text, end="")
    if args.json_out:
        Path(args.json_out).write_text(rows_to_json(rows) + "\n")
    if args.plot:
        from .figures import suite_figure

        suite_figure(rows, args.plot)
    return 0


def cmd_serve(args) -> int:
    from .server import serve

    return serve(
        bind=args.bind,
        port=args.port,
        max_concurrent=args.max_concurrent,
        static_dir=args.static_dir,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "synthesize": cmd_synthesize,
        "verify": cmd_verify,
        "bench": cmd_bench,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except CertSynthError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except RequestShapeError as exc:
        parser.error(str(exc))  # exits 2
    except OSError as exc:
        print(f"{UNKNOWN_ERROR}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - the generic taxonomy catch-all
        print(f"{UNKNOWN_ERROR}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
