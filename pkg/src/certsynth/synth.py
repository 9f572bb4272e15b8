"""Certificate synthesis drivers: four system classes times two properties.

Each driver follows the same two-stage pattern.  Stage 1 solves for the
shape matrix (through its inverse Z) and the data combiner H from the
trajectory matrices alone; stage 2, for safety requests, freezes the
certificate and maximizes the level-set separation lambda - gamma.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .data import TrajectoryData, build_n0, check_rank
from .poly import (
    MatrixPolynomial,
    MonomialBasis,
    Polynomial,
    jacobian,
    theta_autofill,
    validate_theta,
)
from .regions import HyperRectangle, SafetySpec, to_polynomials, validate_spec
from .sdp import LinExpr, PolyExpr, SosProgram, monomials_up_to, solve
from .sdp.expr import (
    lin_matrix_to_pe,
    matpoly_matmul,
    num_matmul,
    pe_transpose,
    poly_times_lin,
)

DEFAULT_EPSILON = 1e-6
LEVEL_MARGIN = 1e-3  # enforced lambda - gamma separation
GAMMA_FLOOR = 1e-6


@dataclass(frozen=True)
class SynthesisRequest:
    mode: str  # "stability" | "safety"
    time_domain: str  # "continuous" | "discrete"
    model_kind: str  # "linear" | "polynomial"
    data: TrajectoryData
    basis: MonomialBasis | None = None
    theta: MatrixPolynomial | str | None = None  # matrix, "auto", or None
    spec: SafetySpec | None = None
    deg_h: int | None = None
    deg_multiplier: int = 2
    epsilon: float = DEFAULT_EPSILON
    decrease_margin: float = 0.0  # strictness added to the non-strict safety decrease
    clf_region: HyperRectangle | None = None  # localizes polynomial CLF decrease

    @property
    def system_class(self) -> str:
        t = "ct" if self.time_domain == "continuous" else "dt"
        k = "LS" if self.model_kind == "linear" else "NPS"
        return f"{t}-{k}"

    def validate(self) -> None:
        if self.mode not in ("stability", "safety"):
            raise ValueError(f"bad mode {self.mode!r}")
        if self.time_domain not in ("continuous", "discrete"):
            raise ValueError(f"bad time domain {self.time_domain!r}")
        if self.model_kind not in ("linear", "polynomial"):
            raise ValueError(f"bad model kind {self.model_kind!r}")
        if self.mode == "safety" and self.spec is None:
            raise ValueError("safety mode requires a region specification")
        if self.model_kind == "polynomial" and self.basis is None:
            raise ValueError("polynomial models require a monomial basis")


@dataclass(frozen=True)
class Certificate:
    kind: str  # "CLF" | "CBC"
    system_class: str  # "ct-LS" | "ct-NPS" | "dt-LS" | "dt-NPS"
    p_matrix: np.ndarray
    z_matrix: np.ndarray
    h: np.ndarray | MatrixPolynomial
    controller_gain: np.ndarray | MatrixPolynomial
    gamma: float | None = None
    lam: float | None = None
    basis: MonomialBasis | None = None
    theta: MatrixPolynomial | None = None
    epsilon: float = DEFAULT_EPSILON
    wall_time_s: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def is_linear(self) -> bool:
        return self.system_class.endswith("LS")

    @property
    def is_continuous(self) -> bool:
        return self.system_class.startswith("ct")

    def certificate_polynomial(self) -> Polynomial:
        """The function V(x) or B(x) as an explicit polynomial."""
        n = self.p_matrix.shape[0]
        if self.is_linear or self.system_class == "dt-NPS":
            nvars = n
            lift = [Polynomial.variable(i, nvars) for i in range(nvars)]
        else:
            nvars = self.basis.nvars
            lift = [Polynomial.from_monomial(m) for m in self.basis]
        acc = Polynomial.zero(nvars)
        for i in range(n):
            for j in range(n):
                c = self.p_matrix[i, j]
                if c:
                    acc = acc + (lift[i] * lift[j]).scale(c)
        return acc


def synthesize(req: SynthesisRequest) -> Certificate:
    """Dispatch a request to the matching driver."""
    req.validate()
    drivers = {
        ("stability", "ct-LS"): synth_clf_ct_ls,
        ("safety", "ct-LS"): synth_cbc_ct_ls,
        ("stability", "ct-NPS"): synth_clf_ct_nps,
        ("safety", "ct-NPS"): synth_cbc_ct_nps,
        ("stability", "dt-LS"): synth_clf_dt_ls,
        ("safety", "dt-LS"): synth_cbc_dt_ls,
        ("stability", "dt-NPS"): synth_clf_dt_nps,
        ("safety", "dt-NPS"): synth_cbc_dt_nps,
    }
    return drivers[(req.mode, req.system_class)](req)


# ---------------- shared pieces ----------------


def _prep_linear(req: SynthesisRequest) -> None:
    check_rank(req.data.x0, "linear-state")
    if req.mode == "safety":
        validate_spec(req.spec, req.data.n_states)


def _prep_polynomial(req: SynthesisRequest) -> np.ndarray:
    if req.basis.nvars != req.data.n_states:
        raise ValueError("basis arity does not match the data")
    n0 = _cached_n0(req)
    check_rank(n0, "lifted")
    if req.mode == "safety":
        validate_spec(req.spec, req.data.n_states)
    return n0


def _conditioned_shape_var(prog: SosProgram, size: int, epsilon: float, condition: bool = True):
    """Z with trace(Z) = size and Z >= eps I (maximizing min eig when asked).

    The trace normalization pins the scale ray; maximizing the smallest
    eigenvalue keeps Z, and hence P = inv(Z), well conditioned so the
    post-hoc checks are numerically meaningful.
    """
    Z = prog.new_sym_matrix("Z", size)
    trace = LinExpr.constant(0.0)
    for i in range(size):
        trace = trace + Z[i][i]
    prog.add_eq(trace, float(size))
    if condition:
        t = prog.new_scalar("t")
        prog.add_psd(
            [
                [Z[i][j] - (t if i == j else 0.0) for j in range(size)]
                for i in range(size)
            ],
            name="Z_conditioning",
        )
        prog.add_nonneg(t - epsilon)
        prog.maximize(t)
    else:
        prog.add_psd(
            [
                [Z[i][j] - (epsilon if i == j else 0.0) for j in range(size)]
                for i in range(size)
            ],
            name="Z_floor",
        )
    return Z


def _lstsq_refine(data_matrix: np.ndarray, coeff: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Minimum-norm correction so data_matrix @ coeff = rhs, iterated twice."""
    for _ in range(2):
        residual = rhs - data_matrix @ coeff
        coeff = coeff + np.linalg.lstsq(data_matrix, residual, rcond=None)[0]
    return coeff


def _polish_linear(x0: np.ndarray, Hv: np.ndarray, Zv: np.ndarray) -> np.ndarray:
    """Project H onto {X0 H = Z} to kill the solver's equality residual.

    The correction is of residual size, so the inequality blocks move by a
    negligible amount, while the representation identity A + BK = X1 H Z^-1
    becomes exact to machine precision.
    """
    return _lstsq_refine(x0, Hv, Zv)


def _polish_poly(
    n0: np.ndarray, Hv: MatrixPolynomial, rhs_for: "callable"
) -> MatrixPolynomial:
    """Per-monomial projection of H(x) onto {N0 H(x) = RHS(x)}."""
    support = sorted(
        {exps for p in Hv.entries for exps in p.terms},
        key=lambda e: (sum(e), tuple(-v for v in e)),
    )
    entries = [dict(p.terms) for p in Hv.entries]
    cols = Hv.cols
    for exps in support:
        coeff = np.array(
            [[entries[i * cols + j].get(exps, 0.0) for j in range(cols)] for i in range(Hv.rows)]
        )
        corrected = _lstsq_refine(n0, coeff, rhs_for(exps))
        for i in range(Hv.rows):
            for j in range(cols):
                entries[i * cols + j][exps] = corrected[i, j]
    return MatrixPolynomial(
        Hv.rows, cols, [Polynomial(Hv.nvars, terms) for terms in entries]
    )


def _stage1_linear(req: SynthesisRequest) -> tuple[np.ndarray, np.ndarray, dict]:
    """Solve for (Z, H) from the linear-class data matrices."""
    x0, x1 = req.data.x0, req.data.x1
    n, T = x0.shape
    strict = req.mode == "stability"
    margin = req.epsilon if strict else req.decrease_margin
    prog = SosProgram()
    Z = _conditioned_shape_var(prog, n, req.epsilon)
    H = [[prog.new_scalar(f"H[{i},{j}]") for j in range(n)] for i in range(T)]

    for i in range(n):
        for j in range(n):
            acc = LinExpr.constant(0.0)
            for k in range(T):
                if x0[i, k]:
                    acc = acc + H[k][j] * x0[i, k]
            prog.add_eq(acc, Z[i][j])

    E = [
        [
            sum((H[k][j] * x1[i, k] for k in range(T) if x1[i, k]), LinExpr.constant(0.0))
            for j in range(n)
        ]
        for i in range(n)
    ]
    if req.time_domain == "continuous":
        block = [
            [-(E[i][j] + E[j][i]) - (margin if i == j else 0.0) for j in range(n)]
            for i in range(n)
        ]
        prog.add_psd(block, name="decrease")
    else:
        size = 2 * n
        block = []
        for i in range(size):
            row = []
            for j in range(size):
                if i < n and j < n:
                    e = Z[i][j] + 0.0
                elif i < n <= j:
                    e = E[i][j - n] + 0.0
                elif j < n <= i:
                    e = E[j][i - n] + 0.0
                else:
                    e = Z[i - n][j - n] + 0.0
                if i == j and margin:
                    e = e - margin
                row.append(e)
            block.append(row)
        prog.add_psd(block, name="decrease")

    result = solve(prog)
    Zv = prog.sym_matrix_value("Z", result.x)
    Hv = np.array(
        [[prog.scalar_value(f"H[{i},{j}]", result.x) for j in range(n)] for i in range(T)]
    )
    Hv = _polish_linear(x0, Hv, Zv)
    diag = {
        "stage1_eq_residual": float(np.max(np.abs(x0 @ Hv - Zv))),
        "stage1_backend": result.backend_description,
        "conditioning": prog.scalar_value("t", result.x),
    }
    return Zv, Hv, diag


def _poly_h_monomials(req: SynthesisRequest) -> list:
    deg = req.deg_h if req.deg_h is not None else req.basis.degree
    return monomials_up_to(req.basis.nvars, deg)


SLACK_TOL = 1e-11
SLACK_HEADROOM = 1.5
SLACK_FLOOR = 1e-9


def _solve_two_phase(make_prog) -> tuple[SosProgram, "SolveResult", float]:
    """Minimize the decrease slack, then re-solve with it frozen.

    Exact-data decrease conditions can be feasible only up to a
    tolerance-level slack (the data identity pins part of the closed loop);
    minimizing the slack first and freezing it restores an interior for the
    conditioning solve.
    """
    phase1 = make_prog(None)
    res1 = solve(phase1)
    s_star = max(phase1.scalar_value("slack", res1.x), 0.0)
    s_fix = s_star * SLACK_HEADROOM + SLACK_FLOOR if s_star > SLACK_TOL else 0.0
    phase2 = make_prog(s_fix)
    res2 = solve(phase2)
    return phase2, res2, s_fix


def _stage1_ct_nps(req: SynthesisRequest) -> tuple[np.ndarray, MatrixPolynomial, dict]:
    n0 = _cached_n0(req)
    N, T = n0.shape
    n = req.basis.nvars
    J = jacobian(req.basis)
    JX1 = J.matmul_right(req.data.x1)  # N x T, polynomial entries

    if req.mode == "stability":
        # The strict decrease is realized as plain matrix-SOS: Jacobian rows
        # of degree-d monomials vanish at the origin, so a positive uniform
        # diagonal margin can never hold there.
        localizers = (
            to_polynomials(req.clf_region) if req.clf_region is not None else []
        )
    else:
        localizers = to_polynomials(req.spec.state_space)
    margin = Polynomial.constant(req.decrease_margin, n)

    def make_prog(slack_value):
        prog = SosProgram()
        Z = _conditioned_shape_var(prog, N, req.epsilon, condition=slack_value is not None)
        H = prog.new_poly_matrix("H", T, N, _poly_h_monomials(req), n)
        NH = num_matmul(n0, H)
        for i in range(N):
            for j in range(N):
                prog.add_eq(NH[i][j], PolyExpr.from_linexpr(Z[i][j], n))
        G = matpoly_matmul(JX1, H)
        Gt = pe_transpose(G)
        S = [[-(G[i][j] + Gt[i][j]) for j in range(N)] for i in range(N)]
        if slack_value is None:
            slack = prog.new_scalar("slack")
            prog.add_nonneg(slack)
            prog.minimize(slack)
        else:
            slack = slack_value or None
        prog.add_sos_matrix(
            S,
            n,
            name="decrease",
            localizers=localizers,
            multiplier_degree=req.deg_multiplier,
            margin=margin,
            slack=slack,
        )
        return prog

    prog, result, s_fix = _solve_two_phase(make_prog)
    Zv = prog.sym_matrix_value("Z", result.x)
    Hv = prog.poly_matrix_value("H", result.x)
    zero = np.zeros((N, N))
    Hv = _polish_poly(n0, Hv, lambda exps: Zv if sum(exps) == 0 else zero)
    diag = {
        "stage1_eq_residual": result.max_eq_violation,
        "stage1_backend": result.backend_description,
        "stage1_min_gram_eig": result.min_gram_eigenvalue,
        "conditioning": prog.scalar_value("t", result.x),
        "decrease_slack": s_fix,
    }
    return Zv, Hv, diag


def _stage1_dt_nps(
    req: SynthesisRequest, theta: MatrixPolynomial
) -> tuple[np.ndarray, MatrixPolynomial, dict]:
    n0 = _cached_n0(req)
    N, T = n0.shape
    n = req.basis.nvars
    x1 = req.data.x1

    if req.mode == "stability":
        margin_val = req.epsilon
        localizers = (
            to_polynomials(req.clf_region) if req.clf_region is not None else []
        )
    else:
        margin_val = req.decrease_margin
        localizers = to_polynomials(req.spec.state_space)

    def make_prog(slack_value):
        prog = SosProgram()
        Z = _conditioned_shape_var(prog, n, req.epsilon, condition=slack_value is not None)
        H = prog.new_poly_matrix("H", T, n, _poly_h_monomials(req), n)

        # N0 H(x) = Theta(x) Z
        NH = num_matmul(n0, H)
        for i in range(N):
            for j in range(n):
                rhs = PolyExpr.zero(n)
                for k in range(n):
                    entry = theta.entry(i, k)
                    if entry.terms:
                        rhs = rhs + poly_times_lin(entry, Z[k][j])
                prog.add_eq(NH[i][j], rhs)

        E = num_matmul(x1, H)  # n x n PolyExpr
        Zpe = lin_matrix_to_pe(Z, n)
        Et = pe_transpose(E)
        size = 2 * n
        block = [[None] * size for _ in range(size)]
        for i in range(size):
            for j in range(size):
                if i < n and j < n:
                    block[i][j] = Zpe[i][j]
                elif i < n <= j:
                    block[i][j] = E[i][j - n]
                elif j < n <= i:
                    block[i][j] = Et[i - n][j]
                else:
                    block[i][j] = Zpe[i - n][j - n]
        if slack_value is None:
            slack = prog.new_scalar("slack")
            prog.add_nonneg(slack)
            prog.minimize(slack)
        else:
            slack = slack_value or None
        prog.add_sos_matrix(
            block,
            n,
            name="decrease",
            localizers=localizers,
            multiplier_degree=req.deg_multiplier,
            margin=Polynomial.constant(margin_val, n),
            slack=slack,
        )
        return prog

    prog, result, s_fix = _solve_two_phase(make_prog)
    Zv = prog.sym_matrix_value("Z", result.x)
    Hv = prog.poly_matrix_value("H", result.x)

    def theta_coefficient(exps):
        rows = np.zeros((N, n))
        for i in range(N):
            for j in range(n):
                rows[i, j] = theta.entry(i, j).terms.get(exps, 0.0)
        return rows @ Zv

    Hv = _polish_poly(n0, Hv, theta_coefficient)
    diag = {
        "stage1_eq_residual": result.max_eq_violation,
        "stage1_backend": result.backend_description,
        "stage1_min_gram_eig": result.min_gram_eigenvalue,
        "conditioning": prog.scalar_value("t", result.x),
        "decrease_slack": s_fix,
    }
    return Zv, Hv, diag


def _level_sets(
    barrier: Polynomial, spec: SafetySpec, deg_multiplier: int
) -> tuple[float, float, dict]:
    """Maximize lambda - gamma for a fixed barrier polynomial.

    The barrier is rescaled by its largest coefficient before compilation
    so residual tolerances stay meaningful; the level values are mapped
    back afterwards.
    """
    n = barrier.nvars
    scale = max(1.0, barrier.max_abs_coeff())
    b_scaled = barrier.scale(1.0 / scale)
    prog = SosProgram()
    gamma = prog.new_scalar("gamma")
    lam = prog.new_scalar("lambda")

    expr = PolyExpr.from_linexpr(gamma, n) - PolyExpr.from_polynomial(b_scaled)
    for j, g in enumerate(to_polynomials(spec.initial)):
        mult = prog.new_sos_poly(f"L_init_{j}", n, deg_multiplier)
        expr = expr - mult.mul_poly(g)
    prog.add_sos(expr, "initial_level")

    for i, box in enumerate(spec.unsafe):
        expr = PolyExpr.from_polynomial(b_scaled) - PolyExpr.from_linexpr(lam, n)
        for j, g in enumerate(to_polynomials(box)):
            mult = prog.new_sos_poly(f"L_unsafe_{i}_{j}", n, deg_multiplier)
            expr = expr - mult.mul_poly(g)
        prog.add_sos(expr, f"unsafe_level_{i}")

    prog.add_nonneg(gamma - GAMMA_FLOOR / scale)
    prog.add_nonneg(lam - gamma - LEVEL_MARGIN / scale)
    prog.maximize(lam - gamma)
    result = solve(prog)
    diag = {
        "stage2_eq_residual": result.max_eq_violation,
        "stage2_min_gram_eig": result.min_gram_eigenvalue,
    }
    return (
        prog.scalar_value("gamma", result.x) * scale,
        prog.scalar_value("lambda", result.x) * scale,
        diag,
    )


def _invert_shape(Z: np.ndarray) -> np.ndarray:
    P = np.linalg.inv(Z)
    return (P + P.T) / 2.0


_N0_CACHE_ATTR = "_n0_cache"


def _cached_n0(req: SynthesisRequest) -> np.ndarray:
    cache = getattr(req.data, _N0_CACHE_ATTR, None)
    if cache is None:
        cache = {}
        object.__setattr__(req.data, _N0_CACHE_ATTR, cache)
    key = tuple(m.exponents for m in req.basis)
    if key not in cache:
        cache[key] = build_n0(req.data.x0, req.basis).n0
    return cache[key]


# ---------------- linear drivers ----------------


def _finish_linear(req: SynthesisRequest, kind: str, Zv, Hv, diag, started, gamma=None, lam=None):
    P = _invert_shape(Zv)
    K = req.data.u0 @ Hv @ np.linalg.inv(Zv)
    return Certificate(
        kind=kind,
        system_class=req.system_class,
        p_matrix=P,
        z_matrix=Zv,
        h=Hv,
        controller_gain=K,
        gamma=gamma,
        lam=lam,
        epsilon=req.epsilon,
        wall_time_s=time.perf_counter() - started,
        diagnostics=diag,
    )


def synth_clf_ct_ls(req: SynthesisRequest) -> Certificate:
    started = time.perf_counter()
    _prep_linear(req)
    Zv, Hv, diag = _stage1_linear(req)
    return _finish_linear(req, "CLF", Zv, Hv, diag, started)


def synth_clf_dt_ls(req: SynthesisRequest) -> Certificate:
    started = time.perf_counter()
    _prep_linear(req)
    Zv, Hv, diag = _stage1_linear(req)
    return _finish_linear(req, "CLF", Zv, Hv, diag, started)


def _quadratic_barrier(P: np.ndarray) -> Polynomial:
    n = P.shape[0]
    terms = {}
    for i in range(n):
        for j in range(n):
            if P[i, j]:
                key = tuple(
                    (1 if k == i else 0) + (1 if k == j else 0) for k in range(n)
                )
                terms[key] = terms.get(key, 0.0) + P[i, j]
    return Polynomial(n, terms)


def synth_cbc_ct_ls(req: SynthesisRequest) -> Certificate:
    started = time.perf_counter()
    _prep_linear(req)
    Zv, Hv, diag = _stage1_linear(req)
    P = _invert_shape(Zv)
    gamma, lam, d2 = _level_sets(_quadratic_barrier(P), req.spec, req.deg_multiplier)
    diag.update(d2)
    return _finish_linear(req, "CBC", Zv, Hv, diag, started, gamma, lam)


def synth_cbc_dt_ls(req: SynthesisRequest) -> Certificate:
    started = time.perf_counter()
    _prep_linear(req)
    Zv, Hv, diag = _stage1_linear(req)
    P = _invert_shape(Zv)
    gamma, lam, d2 = _level_sets(_quadratic_barrier(P), req.spec, req.deg_multiplier)
    diag.update(d2)
    return _finish_linear(req, "CBC", Zv, Hv, diag, started, gamma, lam)


# ---------------- polynomial drivers ----------------


def _finish_nps(req, kind, Zv, Hv, theta, diag, started, gamma=None, lam=None):
    P = _invert_shape(Zv)
    K = Hv.matmul_left(req.data.u0).matmul_right(np.linalg.inv(Zv))
    return Certificate(
        kind=kind,
        system_class=req.system_class,
        p_matrix=P,
        z_matrix=Zv,
        h=Hv,
        controller_gain=K,
        gamma=gamma,
        lam=lam,
        basis=req.basis,
        theta=theta,
        epsilon=req.epsilon,
        wall_time_s=time.perf_counter() - started,
        diagnostics=diag,
    )


def synth_clf_ct_nps(req: SynthesisRequest) -> Certificate:
    started = time.perf_counter()
    _prep_polynomial(req)
    Zv, Hv, diag = _stage1_ct_nps(req)
    return _finish_nps(req, "CLF", Zv, Hv, None, diag, started)


def synth_cbc_ct_nps(req: SynthesisRequest) -> Certificate:
    started = time.perf_counter()
    _prep_polynomial(req)
    Zv, Hv, diag = _stage1_ct_nps(req)
    P = _invert_shape(Zv)
    barrier = _lifted_quadratic(P, req.basis)
    gamma, lam, d2 = _level_sets(barrier, req.spec, req.deg_multiplier)
    diag.update(d2)
    return _finish_nps(req, "CBC", Zv, Hv, None, diag, started, gamma, lam)


def _lifted_quadratic(P: np.ndarray, basis: MonomialBasis) -> Polynomial:
    lift = [Polynomial.from_monomial(m) for m in basis]
    acc = Polynomial.zero(basis.nvars)
    for i in range(len(lift)):
        for j in range(len(lift)):
            if P[i, j]:
                acc = acc + (lift[i] * lift[j]).scale(P[i, j])
    return acc


def _resolve_theta(req: SynthesisRequest) -> MatrixPolynomial:
    if req.theta is None or (isinstance(req.theta, str) and req.theta == "auto"):
        theta = theta_autofill(req.basis)
    else:
        theta = req.theta
    validate_theta(theta, req.basis)
    return theta


def synth_clf_dt_nps(req: SynthesisRequest) -> Certificate:
    started = time.perf_counter()
    _prep_polynomial(req)
    theta = _resolve_theta(req)
    Zv, Hv, diag = _stage1_dt_nps(req, theta)
    return _finish_nps(req, "CLF", Zv, Hv, theta, diag, started)


def synth_cbc_dt_nps(req: SynthesisRequest) -> Certificate:
    started = time.perf_counter()
    _prep_polynomial(req)
    theta = _resolve_theta(req)
    Zv, Hv, diag = _stage1_dt_nps(req, theta)
    P = _invert_shape(Zv)
    gamma, lam, d2 = _level_sets(_quadratic_barrier(P), req.spec, req.deg_multiplier)
    diag.update(d2)
    return _finish_nps(req, "CBC", Zv, Hv, theta, diag, started, gamma, lam)


# ---------------- reporting and serialization ----------------


def controller_polynomials(cert: Certificate) -> list[Polynomial]:
    """Expand the feedback law into one polynomial per input channel."""
    if cert.is_linear:
        gain = cert.controller_gain
        n = gain.shape[1]
        out = []
        for i in range(gain.shape[0]):
            terms = {}
            for j in range(n):
                if gain[i, j]:
                    key = tuple(1 if k == j else 0 for k in range(n))
                    terms[key] = gain[i, j]
            out.append(Polynomial(n, terms))
        return out
    gain = cert.controller_gain
    if cert.system_class == "ct-NPS":
        lift = [Polynomial.from_monomial(m) for m in cert.basis]
    else:
        lift = [Polynomial.variable(j, gain.nvars) for j in range(gain.cols)]
    out = []
    for i in range(gain.rows):
        acc = Polynomial.zero(gain.nvars)
        for j in range(gain.cols):
            acc = acc + gain.entry(i, j) * lift[j]
        out.append(acc)
    return out


def _matrix_payload(value) -> list:
    if isinstance(value, MatrixPolynomial):
        return [
            [value.entry(i, j).pruned().to_string() for j in range(value.cols)]
            for i in range(value.rows)
        ]
    return [[float(v) for v in row] for row in np.asarray(value)]


def certificate_to_json(cert: Certificate) -> dict:
    """Deterministic JSON payload; matrices row-major, polynomials as text."""
    if cert.basis is not None:
        n_states = cert.basis.nvars
    else:
        n_states = cert.p_matrix.shape[0]
    return {
        "kind": cert.kind,
        "system_class": cert.system_class,
        "n_states": n_states,
        "certificate_polynomial": cert.certificate_polynomial().pruned().to_string(),
        "p_matrix": [[float(v) for v in row] for row in cert.p_matrix],
        "z_matrix": [[float(v) for v in row] for row in cert.z_matrix],
        "h": _matrix_payload(cert.h),
        "controller_gain": _matrix_payload(cert.controller_gain),
        "controller": [
            f"u{i + 1} = {p.pruned().to_string()}"
            for i, p in enumerate(controller_polynomials(cert))
        ],
        "gamma": cert.gamma,
        "lambda": cert.lam,
        "monomials": cert.basis.to_string() if cert.basis is not None else None,
        "theta": cert.theta.to_strings() if cert.theta is not None else None,
        "epsilon": cert.epsilon,
    }


def certificate_from_json(payload: dict) -> Certificate:
    from .poly import parse_monomials, parse_polynomial, theta_from_strings

    system_class = payload["system_class"]
    linear = system_class.endswith("LS")
    nvars = int(payload.get("n_states") or len(payload["z_matrix"]))
    basis = (
        parse_monomials(payload["monomials"], nvars) if payload.get("monomials") else None
    )

    def load_matrix_like(grid):
        if linear:
            return np.array(grid, dtype=float)
        entries = [parse_polynomial(str(cell), nvars) for row in grid for cell in row]
        return MatrixPolynomial(len(grid), len(grid[0]), entries)

    theta = (
        theta_from_strings(payload["theta"], nvars) if payload.get("theta") else None
    )
    return Certificate(
        kind=payload["kind"],
        system_class=system_class,
        p_matrix=np.array(payload["p_matrix"], dtype=float),
        z_matrix=np.array(payload["z_matrix"], dtype=float),
        h=load_matrix_like(payload["h"]),
        controller_gain=load_matrix_like(payload["controller_gain"]),
        gamma=payload.get("gamma"),
        lam=payload.get("lambda"),
        basis=basis,
        theta=theta,
        epsilon=payload.get("epsilon", DEFAULT_EPSILON),
    )


def _fmt_value(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def format_certificate(cert: Certificate) -> str:
    """Human-readable report; all expressions in Python syntax."""
    lines = [f"{cert.kind} for {cert.system_class}"]
    symbol = "V" if cert.kind == "CLF" else "B"
    lines.append(f"{symbol}(x) = {cert.certificate_polynomial().pruned().to_string()}")
    if cert.kind == "CBC":
        lines.append(f"gamma = {_fmt_value(cert.gamma)}")
        lines.append(f"lambda = {_fmt_value(cert.lam)}")
    lines.append("P =")
    for row in cert.p_matrix:
        lines.append("  [" + ", ".join(_fmt_value(v) for v in row) + "]")
    lines.append("H =")
    if isinstance(cert.h, MatrixPolynomial):
        for row in cert.h.to_strings():
            lines.append("  [" + ", ".join(row) + "]")
    else:
        for row in cert.h:
            lines.append("  [" + ", ".join(_fmt_value(v) for v in row) + "]")
    lines.append("controller:")
    for text in certificate_to_json(cert)["controller"]:
        lines.append(f"  {text}")
    if cert.theta is not None:
        lines.append("Theta_x =")
        for row in cert.theta.to_strings():
            lines.append("  [" + ", ".join(row) + "]")
    if cert.basis is not None:
        lines.append(f"monomials: {cert.basis.to_string()}")
    lines.append(f"wall time [s]: {cert.wall_time_s:.3f}")
    return "\n".join(lines)
