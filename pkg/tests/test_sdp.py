import numpy as np
import pytest

from certsynth.errors import ConstraintsNotSos, NoSosDecomposition, SolutionFailure
from certsynth.poly import Polynomial
from certsynth.sdp import (
    LinExpr,
    PolyExpr,
    SosProgram,
    monomials_up_to,
    newton_half_candidates,
    solve,
)
from certsynth.sdp.backend import BackendResult


def _poly(nvars, terms):
    return Polynomial(nvars, terms)


def _reconstruct(info_name, result, program):
    info = next(g for g in program.grams if g.name == info_name)
    G = program.gram_value(info, result.x)
    nvars = info.nvars
    acc = Polynomial.zero(nvars)
    for i, bi in enumerate(info.half_basis):
        for j, bj in enumerate(info.half_basis):
            exps = tuple(a + b for a, b in zip(bi, bj))
            acc = acc + Polynomial(nvars, {exps: G[i, j]})
    return acc


class TestPolyEq:
    def test_linear_system_solution(self):
        prog = SosProgram()
        a = prog.new_scalar("a")
        b = prog.new_scalar("b")
        h = PolyExpr(1, {(1,): a, (0,): b})
        prog.add_eq(h.scale(2.0), _poly(1, {(1,): 4.0, (0,): 6.0}))
        result = solve(prog)
        assert prog.scalar_value("a", result.x) == pytest.approx(2.0, abs=1e-9)
        assert prog.scalar_value("b", result.x) == pytest.approx(3.0, abs=1e-9)

    def test_trivial_identity_is_noop(self):
        prog = SosProgram()
        prog.new_scalar("unused")
        prog.add_eq(PolyExpr.zero(1), _poly(1, {}))
        assert solve(prog).status == "optimal"

    def test_contradiction_is_infeasible(self):
        prog = SosProgram()
        prog.new_scalar("unused")
        prog.add_eq(_poly(1, {(0,): 1.0}), _poly(1, {}))
        with pytest.raises(SolutionFailure):
            solve(prog)

    def test_shape_mismatch(self):
        prog = SosProgram()
        with pytest.raises(ValueError):
            prog.add_eq_matrix([[LinExpr.constant(0.0)]], [[LinExpr.constant(0.0)]] * 2)


class TestSos:
    def test_perfect_square_accepted(self):
        prog = SosProgram()
        p = _poly(2, {(2, 0): 1.0, (1, 1): 2.0, (0, 2): 1.0})
        prog.add_sos(p, "p")
        result = solve(prog)
        recon = _reconstruct("p", result, prog)
        diff = recon - p
        assert max((abs(c) for c in diff.terms.values()), default=0.0) < 1e-7

    def test_negative_constant_rejected(self):
        prog = SosProgram()
        prog.add_sos(Polynomial.constant(-1.0, 1), "neg")
        with pytest.raises(SolutionFailure) as err:
            solve(prog)
        assert str(err.value).startswith("Solution Failure")

    def test_newton_pruned_square(self):
        prog = SosProgram()
        p = _poly(2, {(2, 2): 1.0, (1, 1): -2.0, (0, 0): 1.0})
        info = prog.add_sos(p, "sq")
        # degree bounds plus diagonal consistency reduce to the true support
        assert set(info.half_basis) == {(0, 0), (1, 1)}
        result = solve(prog)
        recon = _reconstruct("sq", result, prog)
        diff = recon - p
        assert max(abs(c) for c in diff.terms.values()) < 1e-7

    def test_odd_leading_monomial_flagged(self):
        prog = SosProgram()
        prog.add_sos(_poly(1, {(3,): 1.0, (0,): 1.0}), "odd")
        with pytest.raises(SolutionFailure):
            solve(prog)


class TestPsd:
    def test_scalar_margin(self):
        prog = SosProgram()
        z = prog.new_scalar("z")
        prog.add_psd([[z]], margin=1e-6)
        prog.minimize(z)
        result = solve(prog)
        assert prog.scalar_value("z", result.x) >= 1e-6 - 1e-9

    def test_constant_identity_is_satisfied(self):
        prog = SosProgram()
        prog.new_scalar("unused")
        prog.add_psd([[LinExpr.constant(1.0), LinExpr.constant(0.0)],
                      [LinExpr.constant(0.0), LinExpr.constant(1.0)]])
        assert solve(prog).status == "optimal"

    def test_two_by_two_eigenvalue_bound(self):
        prog = SosProgram()
        z = prog.new_scalar("z")
        one = LinExpr.constant(1.0)
        prog.add_psd([[z, one], [one, z]])
        prog.minimize(z)
        result = solve(prog)
        # smallest feasible z satisfies z >= |1|
        assert prog.scalar_value("z", result.x) == pytest.approx(1.0, abs=1e-7)


class TestObjective:
    def test_linear_program_embedding(self):
        prog = SosProgram()
        lam = prog.new_scalar("lam")
        prog.add_nonneg(3.0 - lam)
        prog.maximize(lam)
        result = solve(prog)
        assert prog.scalar_value("lam", result.x) == pytest.approx(3.0, abs=1e-9)


class TestRandomOracles:
    def test_sos_by_construction_accepted(self):
        rng = np.random.default_rng(0)
        accepted = 0
        for trial in range(50):
            n = int(rng.integers(1, 4))
            target = Polynomial.zero(n)
            for _ in range(3):
                terms = {}
                for _ in range(4):
                    exps = tuple(int(e) for e in rng.integers(0, 3, n))
                    if sum(exps) <= 2:
                        terms[exps] = float(rng.integers(-3, 4))
                q = Polynomial(n, terms)
                target = target + q * q
            prog = SosProgram()
            prog.add_sos(target, "p")
            result = solve(prog)
            recon = _reconstruct("p", result, prog)
            diff = recon - target
            residual = max((abs(c) for c in diff.terms.values()), default=0.0)
            assert residual <= 1e-6, f"trial {trial}: residual {residual}"
            accepted += 1
        assert accepted == 50

    def test_pointwise_negative_rejected(self):
        rng = np.random.default_rng(1)
        rejected = 0
        trials = 0
        while rejected < 20:
            trials += 1
            n = int(rng.integers(1, 4))
            terms = {}
            for _ in range(6):
                exps = tuple(int(e) for e in rng.integers(0, 3, n))
                terms[exps] = float(rng.integers(-4, 5))
            p = Polynomial(n, terms)
            witness = None
            for _ in range(200):
                x = rng.uniform(-2, 2, n)
                if p.evaluate(x) < -1e-6:
                    witness = x
                    break
            if witness is None:
                continue
            prog = SosProgram()
            prog.add_sos(p, "p")
            with pytest.raises((SolutionFailure, NoSosDecomposition, ConstraintsNotSos)):
                solve(prog)
            rejected += 1
        assert trials < 400


class TestDeterminism:
    def _build(self):
        prog = SosProgram()
        gamma = prog.new_scalar("gamma")
        Z = prog.new_sym_matrix("Z", 2)
        prog.add_psd([[Z[0][0], Z[0][1]], [Z[1][0], Z[1][1]]], margin=1e-6)
        prog.add_eq(Z[0][0] + Z[1][1], 2.0)
        H = prog.new_poly_matrix("H", 2, 2, monomials_up_to(2, 1), 2)
        prog.add_eq(H[0][0], PolyExpr.from_linexpr(gamma, 2))
        p = _poly(2, {(2, 0): 1.0, (0, 2): 1.0})
        prog.add_sos(PolyExpr.from_polynomial(p) - PolyExpr.from_linexpr(gamma, 2), "s")
        prog.maximize(gamma)
        return prog

    def test_recompilation_is_byte_identical(self):
        assert self._build().compile().to_bytes() == self._build().compile().to_bytes()

    def test_same_program_compiles_identically_twice(self):
        prog = self._build()
        assert prog.compile().to_bytes() == prog.compile().to_bytes()


class _SloppyGramBackend:
    """Returns a plausible-looking point with an indefinite Gram."""

    def solve(self, problem):
        x = np.zeros(problem.n_vars)
        return BackendResult("optimal", x, "fake")


class TestPostSolveChecks:
    def test_no_sos_decomposition_message(self):
        prog = SosProgram()
        prog.add_sos(_poly(1, {(2,): 1.0, (0,): 1.0}), "p")
        problem = prog.compile()

        class Backend:
            def solve(self, _):
                x = np.zeros(problem.n_vars)
                # Gram = [[0, a], [a, 0]] is indefinite for a != 0
                info = prog.grams[0]
                x[info.index_matrix[0, 1]] = 0.5
                return BackendResult("optimal", x, "fake")

        with pytest.raises(NoSosDecomposition) as err:
            solve(prog, backend=Backend())
        assert str(err.value).startswith("No SOS decomposition found")

    def test_constraints_not_sos_message(self):
        prog = SosProgram()
        prog.add_sos(_poly(1, {(2,): 1.0}), "p")
        with pytest.raises(ConstraintsNotSos) as err:
            solve(prog, backend=_SloppyGramBackend())
        assert str(err.value).startswith("Constraints are not sum-of-squares")

    def test_solution_failure_message_includes_backend_detail(self):
        prog = SosProgram()
        prog.add_sos(Polynomial.constant(-1.0, 1), "neg")
        with pytest.raises(SolutionFailure) as err:
            solve(prog)
        assert "Solution Failure" in str(err.value)


class TestSalvagedIterates:
    def _program(self):
        prog = SosProgram()
        z = prog.new_scalar("z")
        prog.add_psd([[z]])
        prog.add_eq(z, 2.0)
        return prog

    def test_feasible_stalled_iterate_is_accepted(self):
        prog = self._program()

        class Stalled:
            def solve(self, problem):
                return BackendResult(
                    "numerical_failure", np.array([2.0]), "InsufficientProgress"
                )

        result = solve(prog, backend=Stalled())
        assert result.status == "optimal"
        assert "salvaged" in result.backend_description

    def test_infeasible_iterate_is_rejected(self):
        prog = self._program()

        class Garbage:
            def solve(self, problem):
                return BackendResult(
                    "numerical_failure", np.array([-5.0]), "NumericalError"
                )

        with pytest.raises(SolutionFailure):
            solve(prog, backend=Garbage())


class TestNewtonCandidates:
    def test_degree_band(self):
        support = [(2, 2), (1, 1), (0, 0)]
        cands = newton_half_candidates(support, 2)
        assert (0, 0) in cands and (1, 1) in cands
        assert all(sum(c) <= 2 for c in cands)
        assert all(c[0] <= 1 and c[1] <= 1 for c in cands)

    def test_homogeneous_support(self):
        cands = newton_half_candidates([(4, 0), (2, 2), (0, 4)], 2)
        assert all(sum(c) == 2 for c in cands)


@pytest.mark.parametrize("backend_name", ["scs"])
def test_optional_scs_backend(backend_name):
    scs = pytest.importorskip("scs")  # noqa: F841
    from certsynth.sdp import ScsBackend

    prog = SosProgram()
    z = prog.new_scalar("z")
    one = LinExpr.constant(1.0)
    prog.add_psd([[z, one], [one, z]])
    prog.minimize(z)
    result = solve(prog, backend=ScsBackend(eps=1e-10))
    assert prog.scalar_value("z", result.x) == pytest.approx(1.0, abs=1e-6)
