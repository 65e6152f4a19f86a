import numpy as np
import pytest

from mpsylv.errors import DimensionError, SingularEquationError
from mpsylv.linalg import cond_inf, sylvester_kron_operator, unvec, vec
from mpsylv.precision import (
    BFLOAT16,
    BINARY16,
    BINARY32,
    BINARY64,
    TF32,
    B24,
    FlopCounter,
    PrecisionContext,
)
from mpsylv.sylvester import (
    SylvesterProblem,
    bartels_stewart,
    residual,
    solution_norm_bound,
    solve_hermitian,
    solve_sylv_tri,
)

from conftest import cmat, hermitian, rand_upper

CTX = PrecisionContext(BINARY64)


def kron_solve(p):
    Mf = sylvester_kron_operator(p.A, p.B)
    return unvec(np.linalg.solve(Mf, vec(p.C)), p.m, p.n)


class TestSolveSylvTri:
    def test_scalar(self):
        Y = solve_sylv_tri(np.array([[2.0]]), np.array([[3.0]]),
                           np.array([[10.0]]), CTX)
        assert Y[0, 0] == 2.0

    def test_two_by_one_matches_kronecker_oracle(self):
        T_A = np.array([[1.0, 1.0], [0.0, 2.0]])
        T_B = np.array([[3.0]])
        C = np.array([[5.0], [6.0]])
        Y = solve_sylv_tri(T_A, T_B, C, CTX)
        ref = unvec(np.linalg.solve(sylvester_kron_operator(T_A, T_B), vec(C)), 2, 1)
        assert np.abs(Y - ref).max() < 1e-14
        assert np.allclose(Y.ravel(), [0.95, 1.2])

    def test_singular_pair_is_typed(self):
        with pytest.raises(SingularEquationError) as exc:
            solve_sylv_tri(np.array([[1.0]]), np.array([[-1.0]]),
                           np.array([[1.0]]), CTX)
        assert (exc.value.row, exc.value.col) == (0, 0)

    def test_random_upper_pair(self, rng):
        T_A, T_B = rand_upper(rng, 7), rand_upper(rng, 5)
        C = cmat(rng, 7, 5)
        Y = solve_sylv_tri(T_A, T_B, C, CTX)
        assert np.linalg.norm(T_A @ Y + Y @ T_B - C) < 1e-12 * np.linalg.norm(C)

    def test_lower_t_b_adjoint_path(self, rng):
        T_A = rand_upper(rng, 6)
        T_B = T_A.conj().T
        C = cmat(rng, 6, 6)
        Y = solve_sylv_tri(T_A, T_B, C, CTX)
        assert np.linalg.norm(T_A @ Y + Y @ T_B - C) < 1e-12 * np.linalg.norm(C)

    def test_rejects_full_t_a(self, rng):
        with pytest.raises(DimensionError):
            solve_sylv_tri(cmat(rng, 3, 3), rand_upper(rng, 2), cmat(rng, 3, 2), CTX)

    def test_flop_count_matches_mn_m_plus_n(self, rng):
        for m, n in ((12, 9), (20, 20)):
            counter = FlopCounter()
            ctx = PrecisionContext(BINARY64, counter, "w")
            solve_sylv_tri(rand_upper(rng, m), rand_upper(rng, n),
                           cmat(rng, m, n), ctx)
            model = m * n * (m + n)
            assert abs(counter.get("w") - model) <= 0.1 * model


class TestBartelsStewart:
    def test_identity_pair(self):
        p = SylvesterProblem(np.eye(2), np.eye(2), 2 * np.eye(2))
        X, rep = bartels_stewart(p, CTX)
        assert np.allclose(X, np.eye(2), atol=1e-14)

    def test_decoupled_diagonal(self):
        p = SylvesterProblem(np.diag([1.0, 2.0]), np.diag([3.0, 4.0]),
                             np.ones((2, 2)))
        X, _ = bartels_stewart(p, CTX)
        assert np.allclose(X.real, [[1 / 4, 1 / 5], [1 / 5, 1 / 6]], atol=1e-14)

    def test_kronecker_oracle_agreement(self, rng):
        p = SylvesterProblem(cmat(rng, 8, 8), cmat(rng, 6, 6), cmat(rng, 8, 6))
        X, rep = bartels_stewart(p, CTX)
        ref = kron_solve(p)
        assert np.linalg.norm(X - ref) / np.linalg.norm(ref) < 1e-12
        assert rep.residual < 1e-14

    def test_oracle_equivalence_well_separated(self, rng):
        hits = 0
        for _ in range(30):
            m, n = rng.integers(2, 11), rng.integers(2, 11)
            p = SylvesterProblem(cmat(rng, m, m), cmat(rng, n, n), cmat(rng, m, n))
            Mf = sylvester_kron_operator(p.A, p.B)
            from mpsylv.linalg import sep_f, norm
            if sep_f(p.A, p.B) <= 0.01 * norm(Mf, "two"):
                continue
            hits += 1
            X, _ = bartels_stewart(p, CTX)
            ref = kron_solve(p)
            assert np.linalg.norm(X - ref) / np.linalg.norm(ref) <= 1e-11
        assert hits >= 10

    @pytest.mark.parametrize("fmt", [BFLOAT16, BINARY16, TF32, B24, BINARY32, BINARY64])
    def test_residual_stability_per_format(self, fmt, rng):
        # well conditioned problems only: kappa under 1/(100 u); near-scalar
        # coefficients keep even the bfloat16 threshold satisfiable
        u = fmt.unit_roundoff
        done = 0
        for _ in range(20):
            m, n = 5, 4
            p = SylvesterProblem(np.eye(m) + 0.05 * cmat(rng, m, m),
                                 np.eye(n) + 0.05 * cmat(rng, n, n),
                                 cmat(rng, m, n))
            if cond_inf(sylvester_kron_operator(p.A, p.B)) > 1.0 / (100 * u):
                continue
            done += 1
            X, rep = bartels_stewart(p, PrecisionContext(fmt))
            assert rep.residual <= 100 * max(m, n) * u
            if done >= 5:
                break
        assert done >= 3

    def test_lyapunov_single_schur_hermitian_solution(self, rng):
        A = cmat(rng, 6, 6) + 4 * np.eye(6)
        C = hermitian(rng, 6)
        p = SylvesterProblem(A, A.conj().T, C, kind="lyapunov")
        X, rep = bartels_stewart(p, CTX)
        u = BINARY64.unit_roundoff
        assert rep.schur_B.U is rep.schur_A.U
        assert np.linalg.norm(X - X.conj().T) <= 100 * 6 * u * np.linalg.norm(X)
        assert rep.residual < 1e-14

    def test_kind_validation(self, rng):
        A = cmat(rng, 3, 3)
        with pytest.raises(ValueError):
            SylvesterProblem(A, A, cmat(rng, 3, 3), kind="lyapunov")
        with pytest.raises(ValueError):
            SylvesterProblem(A, A.conj().T, cmat(rng, 3, 3), kind="hermitian")


class TestSolveHermitian:
    def test_identity_pair(self):
        p = SylvesterProblem(np.eye(2), np.eye(2), 2 * np.ones((2, 2)),
                             kind="hermitian")
        X = solve_hermitian(p, CTX)
        assert np.allclose(X, np.ones((2, 2)), atol=1e-13)

    def test_known_2x1(self):
        p = SylvesterProblem(np.array([[2.0, 1.0], [1.0, 2.0]]),
                             np.array([[4.0]]), np.array([[6.0], [6.0]]),
                             kind="hermitian")
        X = solve_hermitian(p, CTX)
        assert np.allclose(X.ravel().real, [6 / 7, 6 / 7], atol=1e-12)

    def test_agrees_with_general_path(self, rng):
        A = hermitian(rng, 5, shift=3.0)
        B = hermitian(rng, 4, shift=3.0)
        C = cmat(rng, 5, 4)
        ph = SylvesterProblem(A, B, C, kind="hermitian")
        pg = SylvesterProblem(A, B, C)
        Xh = solve_hermitian(ph, CTX)
        Xg, _ = bartels_stewart(pg, CTX)
        assert np.linalg.norm(Xh - Xg) / np.linalg.norm(Xg) < 1e-11

    def test_zero_eigen_sum_is_typed(self):
        p = SylvesterProblem(np.array([[1.0]]), np.array([[-1.0]]),
                             np.array([[1.0]]), kind="hermitian")
        with pytest.raises(SingularEquationError):
            solve_hermitian(p, CTX)


class TestResidual:
    def test_exact_solution_tiny(self):
        p = SylvesterProblem(np.diag([1.0, 2.0]), np.diag([3.0, 4.0]),
                             np.ones((2, 2)))
        X = np.array([[1 / 4, 1 / 5], [1 / 5, 1 / 6]])
        assert residual(p, X) <= 1e-15

    def test_zero_solution_is_one(self, rng):
        p = SylvesterProblem(cmat(rng, 3, 3), cmat(rng, 2, 2), cmat(rng, 3, 2))
        assert residual(p, np.zeros((3, 2))) == 1.0

    def test_single_entry_perturbation_scales(self, rng):
        p = SylvesterProblem(cmat(rng, 4, 4), cmat(rng, 3, 3), cmat(rng, 4, 3))
        X = kron_solve(p)
        delta = 1e-6
        Xp = X.copy()
        Xp[1, 2] += delta
        E = np.zeros((4, 3))
        E[1, 2] = delta
        expected = np.linalg.norm(p.A @ E + E @ p.B)
        den = (np.linalg.norm(p.C)
               + np.linalg.norm(Xp) * (np.linalg.norm(p.A) + np.linalg.norm(p.B)))
        assert residual(p, Xp) == pytest.approx(expected / den, rel=1e-6)

    def test_norm_bound_diagnostic(self, rng):
        p = SylvesterProblem(cmat(rng, 4, 4) + 3 * np.eye(4),
                             cmat(rng, 3, 3) + 3 * np.eye(3), cmat(rng, 4, 3))
        X = kron_solve(p)
        assert np.linalg.norm(X) <= solution_norm_bound(p) * (1 + 1e-6)
