"""Ground-truth simulators for the benchmark models and the suite harness.

The catalog carries each model's matrices, regions of interest, and the
sample counts used in the reported experiments.  Trajectories are
generated with seeded uniform excitation; open-loop unstable discrete
models are excited under a stabilizing LQR loop plus dither so a single
trajectory stays bounded while remaining persistently exciting.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .data import TrajectoryData
from .errors import CertSynthError
from .poly import MonomialBasis, parse_monomials
from .regions import HyperRectangle, SafetySpec
from .synth import Certificate, SynthesisRequest, synthesize
from .verify import verify_certificate


@dataclass(frozen=True)
class BenchmarkModel:
    name: str
    system_class: str  # "ct-LS" | "ct-NPS" | "dt-LS" | "dt-NPS"
    a_matrix: np.ndarray
    b_matrix: np.ndarray
    basis: MonomialBasis | None = None
    tau: float | None = None  # dt: map constant (informational); ct: sampling period
    default_T: int = 12
    safety_T: int | None = None
    default_spec: SafetySpec | None = None
    input_amplitude: float = 1.0
    init_box: HyperRectangle | None = None
    prestabilize: bool = False
    deg_multiplier: int = 2
    deg_h: int | None = None
    epsilon: float = 1e-4
    in_stability_suite: bool = True
    in_safety_suite: bool = True
    clf_localized: bool = False

    @property
    def n_states(self) -> int:
        return self.a_matrix.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.b_matrix.shape[1]

    @property
    def is_continuous(self) -> bool:
        return self.system_class.startswith("ct")

    @property
    def is_polynomial(self) -> bool:
        return self.system_class.endswith("NPS")

    def lift(self, x: np.ndarray) -> np.ndarray:
        return self.basis.evaluate(x) if self.is_polynomial else np.asarray(x)

    def dynamics(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return self.a_matrix @ self.lift(x) + self.b_matrix @ u


def _box(lower, upper) -> HyperRectangle:
    return HyperRectangle(tuple(lower), tuple(upper))


def _cube(lo: float, hi: float, n: int) -> HyperRectangle:
    return _box([lo] * n, [hi] * n)


def _spec(state, initial, unsafe) -> SafetySpec:
    return SafetySpec(state_space=state, initial=initial, unsafe=tuple(unsafe))


def _companion(coeffs: list[float]) -> np.ndarray:
    n = len(coeffs)
    out = np.zeros((n, n))
    for i in range(n - 1):
        out[i, i + 1] = 1.0
    out[-1, :] = [-c for c in coeffs]
    return out


_HIGH_ORDER = [576.0, 2400.0, 4180.0, 3980.0, 2273.0, 800.0, 170.0, 20.0]


def catalog() -> list[BenchmarkModel]:
    """All benchmark models with their published parameters and regions."""
    models: list[BenchmarkModel] = []

    # --- continuous-time nonlinear polynomial ---
    lv_basis = parse_monomials("x1; x2; x1*x2", 2)
    lv_spec = _spec(
        _box([-2, -1], [2, 1]),
        _box([0.5, 0.2], [1, 0.4]),
        [
            _box([-2, 0.8], [-1.5, 1]),
            _box([-2, -1], [-1.5, -0.8]),
            _box([1.6, 0.85], [2, 1]),
            _box([1.6, -1], [2, -0.8]),
        ],
    )
    models.append(
        BenchmarkModel(
            name="Lotka-Volterra Predator-Prey Model",
            system_class="ct-NPS",
            a_matrix=np.array([[0.6, 0.0, -1.0], [0.0, -0.6, 1.0]]),
            b_matrix=np.array([[-1.0, 0.0], [0.0, 1.0]]),
            basis=lv_basis,
            tau=0.1,
            default_T=12,
            default_spec=lv_spec,
            init_box=lv_spec.initial,
        )
    )
    models.append(
        BenchmarkModel(
            name="Van der Pol Oscillator",
            system_class="ct-NPS",
            a_matrix=np.array([[0.0, 1.0, 0.0], [-1.0, 1.0, -1.0]]),
            b_matrix=np.array([[0.0], [1.0]]),
            basis=parse_monomials("x1; x2; x1**2*x2", 2),
            tau=0.1,
            default_T=15,
            default_spec=_spec(
                _cube(-2, 2, 2),
                _cube(-0.2, 0.2, 2),
                [_cube(-2, -1.5, 2), _cube(1.5, 2, 2)],
            ),
            init_box=_cube(-0.2, 0.2, 2),
            deg_multiplier=4,
            clf_localized=True,
        )
    )

    # --- continuous-time linear ---
    models.append(
        BenchmarkModel(
            name="DC Motor",
            system_class="ct-LS",
            a_matrix=np.array([[-100.0, -1.0], [1.0, -100.0]]),
            b_matrix=np.eye(2),
            tau=0.02,
            default_T=15,
            default_spec=_spec(
                _cube(-1, 1, 2),
                _box([0.1, 0.1], [0.4, 0.55]),
                [
                    _box([0.5, 0.6], [1, 1]),
                    _box([-1, 0.6], [-0.6, 1]),
                    _box([-1, -1], [-0.7, -0.6]),
                    _box([0.6, -1], [1, -0.6]),
                ],
            ),
            init_box=_box([0.1, 0.1], [0.4, 0.55]),
        )
    )
    models.append(
        BenchmarkModel(
            name="Room Temperature System 1",
            system_class="ct-LS",
            a_matrix=np.array([[-0.055, 0.05], [0.05, -0.058]]),
            b_matrix=np.array([[0.005], [0.008]]),
            tau=0.5,
            default_T=15,
            default_spec=_spec(
                _cube(-2, 3, 2),
                _cube(-0.5, 0.5, 2),
                [_box([-2, 2], [-1, 3]), _box([2, -2], [3, -1])],
            ),
            init_box=_cube(-0.5, 0.5, 2),
            input_amplitude=5.0,
        )
    )
    models.append(
        BenchmarkModel(
            name="Two Tank System",
            system_class="ct-LS",
            a_matrix=np.array([[-1.0, 0.0], [1.0, -1.0]]),
            b_matrix=np.array([[0.5, 0.0], [0.0, 0.5]]),
            tau=0.1,
            default_T=12,
            default_spec=_spec(
                _cube(-3, 3, 2),
                _cube(-1, 1, 2),
                [_cube(1.5, 3, 2), _cube(-3, -1.5, 2)],
            ),
            init_box=_cube(-1, 1, 2),
        )
    )
    for order, x_hi, xo in ((4, 2.0, (-2.4, -1.6)), (6, 2.0, (-2.0, -1.6)), (8, 2.2, (-2.2, -1.8))):
        init = _cube(0.9, 1.1, 8) if order == 8 else _cube(0.5, 1.5, order)
        models.append(
            BenchmarkModel(
                name=f"High Order {order}",
                system_class="ct-LS",
                a_matrix=_companion(_HIGH_ORDER[:order]),
                b_matrix=np.eye(order)[:, -1:],
                tau=0.05,
                default_T=16,
                safety_T=20 if order == 8 else 16,
                default_spec=_spec(
                    _cube(-x_hi, x_hi, order),
                    init,
                    [_cube(xo[0], xo[1], order)],
                ),
                # the stiff chain integrates states of the single input; a
                # wide seed state and strong excitation keep X0 well spread
                init_box=_cube(-x_hi, x_hi, order),
                input_amplitude=1000.0,
            )
        )

    # --- discrete-time nonlinear polynomial ---
    tau = 0.01
    models.append(
        BenchmarkModel(
            name="Lotka-Volterra Predator Prey",
            system_class="dt-NPS",
            a_matrix=np.array(
                [[1 + tau * 0.6, 0.0, -tau], [0.0, 1 - tau * 0.6, tau]]
            ),
            b_matrix=np.array([[-tau], [tau]]),
            basis=lv_basis,
            tau=tau,
            default_T=12,
            default_spec=lv_spec,
            init_box=lv_spec.initial,
            in_stability_suite=False,
        )
    )
    models.append(
        BenchmarkModel(
            name="Academic System",
            system_class="dt-NPS",
            a_matrix=np.eye(2),
            b_matrix=np.array([[0.0], [1.0]]),
            basis=parse_monomials("x2; x1**2", 2),
            tau=0.1,
            default_T=12,
            init_box=_cube(-0.2, 0.2, 2),
            input_amplitude=0.1,
            in_safety_suite=False,
        )
    )
    tau = 1e-3
    rho, sigma, beta = 28.0, 10.0, 8.0 / 3.0
    models.append(
        BenchmarkModel(
            name="Lorenz Attractor",
            system_class="dt-NPS",
            a_matrix=np.array(
                [
                    [1 + tau * sigma, tau * sigma, 0.0, 0.0, 0.0, 0.0],
                    [tau * rho, 1 - tau, 0.0, 0.0, 0.0, -tau],
                    [0.0, 0.0, 1 - tau * beta, tau, 0.0, 0.0],
                ]
            ),
            b_matrix=np.array([[tau], [tau], [tau]]),
            basis=parse_monomials("x1; x2; x3; x1*x2; x2*x3; x1*x3", 3),
            tau=tau,
            default_T=12,
            default_spec=_spec(
                _cube(-5, 5, 3),
                _cube(-1, 1, 3),
                [_cube(-5, -3.5, 3), _cube(3.5, 5, 3)],
            ),
            init_box=_cube(-1, 1, 3),
            input_amplitude=200.0,
            deg_multiplier=0,
            deg_h=1,
            clf_localized=True,
        )
    )

    # --- discrete-time linear ---
    tau = 0.01
    models.append(
        BenchmarkModel(
            name="DC Motor",
            system_class="dt-LS",
            a_matrix=np.array([[1 - tau * 100.0, -tau * 1.0], [tau * 1.0, 1 - tau * 100.0]]),
            b_matrix=np.eye(2),
            tau=tau,
            default_T=15,
            default_spec=_spec(
                _cube(-1, 1, 2),
                _box([0.1, 0.1], [0.4, 0.55]),
                [_box([0.45, 0.6], [1, 1]), _box([-1, 0.6], [-0.6, 1])],
            ),
            init_box=_box([0.1, 0.1], [0.4, 0.55]),
            input_amplitude=0.5,
        )
    )
    tau = 5.0
    alpha, ae1, ae2, ae3 = 0.05, 0.005, 0.008, 0.008
    models.append(
        BenchmarkModel(
            name="Room Temperature System 1",
            system_class="dt-LS",
            a_matrix=np.array(
                [
                    [1 - tau * (alpha + ae1), tau * alpha],
                    [tau * alpha, 1 - tau * (alpha + ae2)],
                ]
            ),
            b_matrix=np.array([[tau * ae1], [tau * ae2]]),
            tau=tau,
            default_T=15,
            default_spec=_spec(
                _cube(-2, 3, 2),
                _cube(-0.5, 0.5, 2),
                [
                    _cube(2, 3, 2),
                    _box([-2, 1.5], [-0.5, 3]),
                    _box([1.5, -2], [3, -0.5]),
                ],
            ),
            init_box=_cube(-0.5, 0.5, 2),
            input_amplitude=5.0,
        )
    )
    models.append(
        BenchmarkModel(
            name="Room Temperature System 2",
            system_class="dt-LS",
            a_matrix=np.array(
                [
                    [1 - tau * (alpha - ae1), 0.0, tau * alpha],
                    [tau * alpha, 1 - tau * (2 * alpha - ae2), tau * alpha],
                    [tau * alpha, 0.0, 1 - tau * (alpha - ae3)],
                ]
            ),
            b_matrix=np.array([[tau * ae1], [tau * ae2], [tau * ae3]]),
            tau=tau,
            default_T=15,
            default_spec=_spec(
                _cube(-2, 3, 3),
                _cube(-0.5, 0.5, 3),
                [
                    _box([2, -3, 2], [3, -2, 3]),
                    _box([-3, 2, -3], [-2, 3, -2]),
                ],
            ),
            init_box=_cube(-0.5, 0.5, 3),
            input_amplitude=5.0,
        )
    )
    tau = 0.1
    models.append(
        BenchmarkModel(
            name="Two Tank System",
            system_class="dt-LS",
            a_matrix=np.array([[1 - tau, 0.0], [tau, 1 - tau]]),
            b_matrix=np.array([[tau * 0.5, 0.0], [0.0, tau * 0.5]]),
            tau=tau,
            default_T=8,
            default_spec=_spec(
                _cube(-2, 2, 2),
                _cube(-0.5, 0.5, 2),
                [
                    _cube(1.5, 2, 2),
                    _box([-2, 1], [-1.5, 2]),
                    _box([-1.5, 1.5], [-1, 2]),
                    _box([1.5, -2], [2, -1]),
                ],
            ),
            init_box=_cube(-0.5, 0.5, 2),
        )
    )
    for order, tau, x_hi, xo in (
        (4, 0.001, 2.0, (-2.4, -1.6)),
        (6, 0.1, 2.0, (-2.0, -1.6)),
        (8, 0.1, 2.2, (-2.2, -1.8)),
    ):
        init = _cube(0.9, 1.1, 8) if order == 8 else _cube(0.5, 1.5, order)
        models.append(
            BenchmarkModel(
                name=f"High Order {order}",
                system_class="dt-LS",
                a_matrix=np.eye(order) + tau * _companion(_HIGH_ORDER[:order]),
                b_matrix=tau * np.eye(order),
                tau=tau,
                default_T=16,
                safety_T=20 if order == 8 else 16,
                default_spec=_spec(
                    _cube(-x_hi, x_hi, order),
                    init,
                    [_cube(xo[0], xo[1], order)],
                ),
                init_box=init,
                prestabilize=True,
            )
        )
    return models


def find_model(name: str, system_class: str | None = None) -> BenchmarkModel:
    for model in catalog():
        if model.name == name and (system_class is None or model.system_class == system_class):
            return model
    raise KeyError(f"unknown benchmark {name!r}")


def _lqr_gain(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    s = scipy.linalg.solve_discrete_are(a, b, np.eye(a.shape[0]), np.eye(b.shape[1]))
    return np.linalg.solve(np.eye(b.shape[1]) + b.T @ s @ b, b.T @ s @ a)


def generate_data(model: BenchmarkModel, T: int, seed: int = 0) -> TrajectoryData:
    """Simulate one seeded input-state trajectory of length T."""
    if T < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    n, m = model.n_states, model.n_inputs
    init = model.init_box or _cube(-0.5, 0.5, n)
    x = init.sample(rng, 1)[:, 0]
    u0 = np.zeros((m, T))
    x0 = np.zeros((n, T))
    x1 = np.zeros((n, T))
    gain = _lqr_gain(model.a_matrix, model.b_matrix) if model.prestabilize else None

    if model.is_continuous:
        tau = model.tau
        h = tau / 100.0
        for k in range(T):
            u = model.input_amplitude * rng.uniform(-1.0, 1.0, m)
            u0[:, k] = u
            x0[:, k] = x
            x1[:, k] = model.dynamics(x, u)  # exact derivative at the sample
            for _ in range(100):
                k1 = model.dynamics(x, u)
                k2 = model.dynamics(x + 0.5 * h * k1, u)
                k3 = model.dynamics(x + 0.5 * h * k2, u)
                k4 = model.dynamics(x + h * k3, u)
                x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    else:
        for k in range(T):
            u = model.input_amplitude * rng.uniform(-1.0, 1.0, m)
            if gain is not None:
                u = u - gain @ x
            u0[:, k] = u
            x0[:, k] = x
            x = model.dynamics(x, u)
            x1[:, k] = x

    return TrajectoryData(
        u0=u0,
        x0=x0,
        x1=x1,
        time_domain="continuous" if model.is_continuous else "discrete",
        tau=model.tau if model.is_continuous else None,
    )


def build_request(model: BenchmarkModel, mode: str, data: TrajectoryData) -> SynthesisRequest:
    safety = mode == "safety"
    return SynthesisRequest(
        mode=mode,
        time_domain=data.time_domain,
        model_kind="polynomial" if model.is_polynomial else "linear",
        data=data,
        basis=model.basis,
        theta="auto" if model.system_class == "dt-NPS" else None,
        spec=model.default_spec if safety else None,
        deg_h=model.deg_h,
        deg_multiplier=model.deg_multiplier,
        epsilon=model.epsilon,
        decrease_margin=0.0 if model.is_polynomial else (1e-7 if safety else 0.0),
        clf_region=(
            model.default_spec.state_space
            if (not safety and model.clf_localized and model.default_spec is not None)
            else None
        ),
    )


def run_model(
    model: BenchmarkModel, mode: str, seed: int = 0, samples: int = 10_000
) -> tuple[dict, Certificate | None]:
    """Generate data, synthesize, and verify one benchmark row."""
    T = model.safety_T if (mode == "safety" and model.safety_T) else model.default_T
    row = {
        "name": model.name,
        "system_class": model.system_class,
        "n": model.n_states,
        "T": T,
        "gamma": None,
        "lambda": None,
        "wall_time_s": None,
        "verified": False,
        "error": None,
    }
    try:
        data = generate_data(model, T, seed=seed)
        req = build_request(model, mode, data)
        cert = synthesize(req)
        region = model.default_spec.state_space if model.default_spec else None
        report = verify_certificate(
            cert,
            data,
            spec=model.default_spec if mode == "safety" else None,
            samples=samples,
            seed=seed,
            region=region,
        )
        row.update(
            gamma=cert.gamma,
            **{"lambda": cert.lam},
            wall_time_s=cert.wall_time_s,
            verified=report.passed,
        )
        return row, cert
    except CertSynthError as exc:
        row["error"] = str(exc)
        return row, None


def run_suite(
    mode: str,
    models: list[BenchmarkModel] | None = None,
    seed: int = 0,
    samples: int = 10_000,
) -> list[dict]:
    """Synthesize and verify every benchmark of the requested suite."""
    if mode not in ("stability", "safety"):
        raise ValueError(f"bad mode {mode!r}")
    if models is None:
        flag = "in_safety_suite" if mode == "safety" else "in_stability_suite"
        models = [m for m in catalog() if getattr(m, flag)]
    rows = []
    for model in models:
        row, _ = run_model(model, mode, seed=seed, samples=samples)
        rows.append(row)
    return rows


SUITE_COLUMNS = ["name", "system_class", "n", "T", "gamma", "lambda", "wall_time_s", "verified"]


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SUITE_COLUMNS, extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def rows_to_json(rows: list[dict]) -> str:
    return json.dumps(rows, indent=2, sort_keys=True)
