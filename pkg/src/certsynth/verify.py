"""Solver-free certificate validation.

Sampling-based checks of the defining certificate inequalities, plus
ground-truth closed-loop checks for test harnesses that know the
generating model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import TrajectoryData
from .poly import MatrixPolynomial, jacobian
from .regions import HyperRectangle, SafetySpec
from .synth import Certificate

LEVEL_TOL = 1e-6
DECREASE_TOL = 1e-6
POSITIVITY_EXCLUSION = 1e-3  # radius around the origin skipped for V > 0


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst_violation: float
    worst_point: list[float] | None = None

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "worst_violation": self.worst_violation,
            "worst_point": self.worst_point,
        }


@dataclass
class VerificationReport:
    passed: bool
    samples: int
    seed: int
    checks: list[CheckResult] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "samples": self.samples,
            "seed": self.seed,
            "checks": [c.to_json() for c in self.checks],
        }


def _eval_matrix_poly(mp: MatrixPolynomial, pts: np.ndarray) -> np.ndarray:
    """Evaluate a matrix polynomial at n x K sample columns -> (rows, cols, K)."""
    K = pts.shape[1]
    out = np.empty((mp.rows, mp.cols, K))
    for i in range(mp.rows):
        for j in range(mp.cols):
            out[i, j] = mp.entry(i, j).evaluate_many(pts)
    return out


def _barrier_values(cert: Certificate, pts: np.ndarray) -> np.ndarray:
    if cert.is_linear or cert.system_class == "dt-NPS":
        lifted = pts
    else:
        lifted = cert.basis.evaluate_many(pts)
    return np.einsum("ik,ij,jk->k", lifted, cert.p_matrix, lifted)


def _closed_loop_next(cert: Certificate, data: TrajectoryData, pts: np.ndarray) -> np.ndarray:
    """Data-based closed-loop map: successor states (dt) or derivatives (ct)."""
    z_inv = np.linalg.inv(cert.z_matrix)
    if cert.is_linear:
        return data.x1 @ cert.h @ z_inv @ pts
    h_vals = _eval_matrix_poly(cert.h, pts)
    if cert.system_class == "ct-NPS":
        lifted = cert.basis.evaluate_many(pts)
        inner = np.einsum("ij,jk->ik", z_inv, lifted)
    else:  # dt-NPS
        inner = np.einsum("ij,jk->ik", z_inv, pts)
    pushed = np.einsum("tjk,jk->tk", h_vals, inner)
    return data.x1 @ pushed


def _decrease_values(cert: Certificate, data: TrajectoryData, pts: np.ndarray) -> np.ndarray:
    """Bdot for continuous time, B(x+) - B(x) for discrete time."""
    if cert.is_continuous:
        flow = _closed_loop_next(cert, data, pts)
        if cert.is_linear:
            grad = 2.0 * (cert.p_matrix @ pts)
            return np.einsum("ik,ik->k", grad, flow)
        lifted = cert.basis.evaluate_many(pts)
        jac_vals = _eval_matrix_poly(jacobian(cert.basis), pts)
        jf = np.einsum("ijk,jk->ik", jac_vals, flow)
        return 2.0 * np.einsum("ik,ij,jk->k", lifted, cert.p_matrix, jf)
    nxt = _closed_loop_next(cert, data, pts)
    b_next = np.einsum("ik,ij,jk->k", nxt, cert.p_matrix, nxt)
    return b_next - _barrier_values(cert, pts)


def _record(checks: list, name: str, values: np.ndarray, pts: np.ndarray, tol: float):
    """Values must be <= tol; store the worst offender."""
    worst = int(np.argmax(values))
    checks.append(
        CheckResult(
            name=name,
            passed=bool(values[worst] <= tol),
            worst_violation=float(values[worst]),
            worst_point=[float(v) for v in pts[:, worst]],
        )
    )


def verify_certificate(
    cert: Certificate,
    data: TrajectoryData,
    spec: SafetySpec | None = None,
    samples: int = 10_000,
    seed: int = 0,
    region: HyperRectangle | None = None,
) -> VerificationReport:
    """Check the certificate's defining inequalities at sampled points.

    Safety certificates check level sets on the initial and unsafe boxes
    plus the decrease condition over the state space; stability
    certificates check the decrease condition and positivity over
    ``region`` (default unit box).
    """
    rng = np.random.default_rng(seed)
    checks: list[CheckResult] = []
    n = data.n_states

    if cert.kind == "CBC":
        if spec is None:
            raise ValueError("safety verification requires the region specification")
        pts = spec.initial.sample(rng, samples)
        _record(checks, "initial_level", _barrier_values(cert, pts) - cert.gamma, pts, LEVEL_TOL)
        for i, box in enumerate(spec.unsafe):
            pts = box.sample(rng, samples)
            _record(
                checks,
                f"unsafe_level_{i}",
                cert.lam - _barrier_values(cert, pts),
                pts,
                LEVEL_TOL,
            )
        pts = spec.state_space.sample(rng, samples)
        _record(checks, "decrease", _decrease_values(cert, data, pts), pts, DECREASE_TOL)
    else:
        box = region or (spec.state_space if spec is not None else None)
        if box is None:
            box = HyperRectangle((-1.0,) * n, (1.0,) * n)
        pts = box.sample(rng, samples)
        _record(checks, "decrease", _decrease_values(cert, data, pts), pts, DECREASE_TOL)
        radii = np.linalg.norm(pts, axis=0)
        keep = radii > POSITIVITY_EXCLUSION
        vpts = pts[:, keep]
        values = _barrier_values(cert, vpts)
        _record(checks, "positivity", -values, vpts, 0.0)

    return VerificationReport(
        passed=all(c.passed for c in checks),
        samples=samples,
        seed=seed,
        checks=checks,
    )


@dataclass
class TruthReport:
    identity_error: float
    spectrum_ok: bool
    decrease_consequence: float | None
    symmetric_part_max_eig: float | None
    passed: bool

    def to_json(self) -> dict:
        return {
            "identity_error": self.identity_error,
            "spectrum_ok": self.spectrum_ok,
            "decrease_consequence": self.decrease_consequence,
            "symmetric_part_max_eig": self.symmetric_part_max_eig,
            "passed": self.passed,
        }


IDENTITY_TOL = 1e-6
SPECTRUM_TOL = 1e-8


def verify_against_truth(
    cert: Certificate,
    true_a: np.ndarray,
    true_b: np.ndarray,
    data: TrajectoryData,
    basis=None,
    theta: MatrixPolynomial | None = None,
) -> TruthReport:
    """Check the data-based representation identity against the true model.

    For linear classes, additionally checks the closed-loop spectrum and,
    in the continuous safety case, the decrease inequality consequence
    weighted by the designed shape matrix.
    """
    z_inv = np.linalg.inv(cert.z_matrix)
    if cert.is_linear:
        closed = true_a + true_b @ cert.controller_gain
        reconstruction = data.x1 @ cert.h @ z_inv
        identity_error = float(np.max(np.abs(closed - reconstruction)))
        eigs = np.linalg.eigvals(closed)
        if cert.is_continuous:
            margin = float(np.max(eigs.real))
            spectrum_ok = margin < 0 if cert.kind == "CLF" else margin <= SPECTRUM_TOL
        else:
            rho = float(np.max(np.abs(eigs)))
            spectrum_ok = rho < 1 if cert.kind == "CLF" else rho <= 1 + SPECTRUM_TOL
        decrease_consequence = None
        sym_max = None
        if cert.is_continuous:
            weighted = closed @ cert.z_matrix + cert.z_matrix @ closed.T
            decrease_consequence = float(np.linalg.eigvalsh(weighted)[-1])
            sym_max = float(np.linalg.eigvalsh(closed + closed.T)[-1])
        passed = identity_error <= IDENTITY_TOL and spectrum_ok
        if cert.kind == "CBC" and cert.is_continuous:
            passed = passed and decrease_consequence <= IDENTITY_TOL
        return TruthReport(identity_error, spectrum_ok, decrease_consequence, sym_max, passed)

    # polynomial classes: compare the matrix polynomials coefficient-wise
    basis = basis or cert.basis
    q_poly = cert.h.matmul_right(z_inv)  # Q(x) = H(x) Z^-1
    reconstruction = q_poly.matmul_left(data.x1)
    if cert.system_class == "ct-NPS":
        target = MatrixPolynomial.from_array(true_a, basis.nvars) + (
            cert.controller_gain.matmul_left(true_b)
        )
    else:
        theta = theta or cert.theta
        target = theta.matmul_left(true_a) + cert.controller_gain.matmul_left(true_b)
    diff = target + (-reconstruction)
    identity_error = max(
        max((abs(c) for c in p.terms.values()), default=0.0) for p in diff.entries
    )
    return TruthReport(float(identity_error), True, None, None, identity_error <= IDENTITY_TOL)
