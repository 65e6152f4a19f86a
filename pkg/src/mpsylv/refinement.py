"""Two-precision iterative refinement for Sylvester equations.

The building block is a stationary iteration for the perturbed triangular
equation (T_A + dT_A) Y + Y (T_B + dT_B) = C: each step solves the
unperturbed triangular equation for a correction and adds it to the
iterate.  On top of it sit two full solvers.  Both compute the Schur
decompositions of the coefficients in the low precision and then, in the
high precision, either re-orthonormalize the near-unitary factors by QR
(`mp_orth`) or work with their inverses through LU factorizations
(`mp_inv`); the triangular parts are refined to high precision and the
solution is recovered with factors that are unitary (or inverted) to high
precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericBreakdownError, SingularEquationError
from .linalg import gemm, lu, lu_solve, mgs_qr, schur, SchurFactors
from .precision import (
    BINARY64,
    FlopCounter,
    FpFormat,
    PrecisionContext,
    fl_add,
    fl_sub,
    _round_complex_array,
)
from .sylvester import SylvesterProblem, residual, solve_sylv_tri

__all__ = [
    "RefinementConfig",
    "SolveReport",
    "ConvergenceRegime",
    "solve_pert_sylv_tri_stat",
    "ir_linear_system",
    "mp_orth",
    "mp_inv",
    "check_convergence_regime",
]


@dataclass(frozen=True)
class RefinementConfig:
    """Precision pair and stopping rule for the refinement loops.

    The iteration stops when ||D_{i-1}||_F / ||Y_i||_F <= epsilon or after
    max_iter corrections.  With epsilon=None the tolerance defaults to
    1e-12 * max(m, n) when the high precision is binary64, and to
    1e4 * u_h * max(m, n) otherwise.
    """

    u_l: FpFormat = field(default_factory=lambda: BINARY64)
    u_h: FpFormat = field(default_factory=lambda: BINARY64)
    epsilon: float | None = None
    max_iter: int = 20

    def __post_init__(self):
        if self.u_h.unit_roundoff > self.u_l.unit_roundoff:
            raise ValueError("the high precision must not be coarser than the low one")
        if self.epsilon is not None and self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")

    def resolve_epsilon(self, m: int, n: int) -> float:
        if self.epsilon is not None:
            return self.epsilon
        if self.u_h.is_binary64:
            return 1e-12 * max(m, n)
        return 1e4 * self.u_h.unit_roundoff * max(m, n)


@dataclass(frozen=True)
class SolveReport:
    """Outcome of a refinement run.

    ``iterations`` counts computed corrections; ``correction_norms`` holds
    ||D_i||_F per step.  ``failure`` is None on success, otherwise one of
    "singular_equation", "nan_breakdown", "non_convergence" with detail.
    """

    X: np.ndarray
    iterations: int
    correction_norms: list
    residual: float
    converged: bool
    failure: str | None = None


def solve_pert_sylv_tri_stat(T_A, dT_A, T_B, dT_B, C, Y0,
                             cfg: RefinementConfig,
                             counter: FlopCounter | None = None) -> SolveReport:
    """Stationary refinement for (T_A + dT_A) Y + Y (T_B + dT_B) = C.

    T_A and T_B are triangular, the perturbations unstructured.  Every
    arithmetic step runs in the high precision of ``cfg``; each pass forms
    the right-hand side with two matrix products, solves the triangular
    equation for the correction and updates the iterate.  The first
    iteration always runs.
    """
    ctx = PrecisionContext(cfg.u_h, counter, "high")
    T_A = np.asarray(T_A, dtype=np.complex128)
    T_B = np.asarray(T_B, dtype=np.complex128)
    C = np.asarray(C, dtype=np.complex128)
    Y = np.asarray(Y0, dtype=np.complex128).copy()
    m, n = C.shape
    eps = cfg.resolve_epsilon(m, n)
    S_A = fl_add(T_A, dT_A, ctx)
    S_B = fl_add(T_B, dT_B, ctx)
    pert_problem = SylvesterProblem(S_A, S_B, C)
    norms = []
    converged = False
    failure = None
    i = 0
    while i < cfg.max_iter:
        R = gemm(-1.0, S_A, Y, 1.0, C, ctx)
        R = gemm(-1.0, Y, S_B, 1.0, R, ctx)
        try:
            D = solve_sylv_tri(T_A, T_B, R, ctx)
        except NumericBreakdownError as exc:
            failure = f"nan_breakdown: {exc}"
            break
        Y = fl_add(Y, D, ctx)
        i += 1
        nD = float(np.linalg.norm(D))
        nY = float(np.linalg.norm(Y))
        norms.append(nD)
        if not (np.isfinite(nD) and np.isfinite(nY)):
            failure = "nan_breakdown: iterate diverged to non-finite values"
            break
        if nD <= eps * nY:
            converged = True
            break
    if failure is None and not converged:
        failure = "non_convergence: correction ratio above epsilon at max_iter"
    return SolveReport(Y, i, norms, residual(pert_problem, Y), converged, failure)


def ir_linear_system(M, dM, b, x0, cfg: RefinementConfig,
                     counter: FlopCounter | None = None) -> SolveReport:
    """Iterative refinement for M x = b with a perturbed solver.

    The correction equation (M - dM) d = r is solved through one LU
    factorization computed up front; residuals and updates run in the high
    precision of ``cfg``.  Mirrors the stationary Sylvester iteration on
    the stacked-columns form and is used to validate it.
    """
    ctx = PrecisionContext(cfg.u_h, counter, "high")
    M = np.asarray(M, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128).ravel()
    x = np.asarray(x0, dtype=np.complex128).ravel().copy()
    s = b.size
    eps = cfg.resolve_epsilon(s, 1)
    F = lu(fl_sub(M, dM, ctx), ctx)
    norms = []
    converged = False
    failure = None
    i = 0
    while i < cfg.max_iter:
        r = gemm(-1.0, M, x[:, None], 1.0, b[:, None], ctx)
        d = lu_solve(F, r, ctx=ctx).ravel()
        x = np.asarray(fl_add(x, d, ctx))
        i += 1
        nd = float(np.linalg.norm(d))
        nx = float(np.linalg.norm(x))
        norms.append(nd)
        if not (np.isfinite(nd) and np.isfinite(nx)):
            failure = "nan_breakdown: iterate diverged to non-finite values"
            break
        if nd <= eps * nx:
            converged = True
            break
    if failure is None and not converged:
        failure = "non_convergence: correction ratio above epsilon at max_iter"
    res = float(np.linalg.norm(b - M @ x)
                / max(np.linalg.norm(b) + np.linalg.norm(M) * np.linalg.norm(x), 1e-300))
    return SolveReport(x, i, norms, res, converged, failure)


def _failed_report(p: SylvesterProblem, reason: str) -> SolveReport:
    X = np.full((p.m, p.n), np.nan, dtype=np.complex128)
    return SolveReport(X, 0, [], float("nan"), False, reason)


def _low_precision_schur_pair(p: SylvesterProblem, ctx_l: PrecisionContext):
    A_l = _round_complex_array(p.A, ctx_l.format)
    sf_A = schur(A_l, ctx_l)
    if p.kind == "lyapunov":
        sf_B = SchurFactors(sf_A.U, sf_A.T.conj().T.copy(), sf_A.computed_in)
    else:
        sf_B = schur(_round_complex_array(p.B, ctx_l.format), ctx_l)
    return sf_A, sf_B


def _initial_triangular_solve(T_A, T_B, F, ctx_l: PrecisionContext):
    F_l = _round_complex_array(np.asarray(F), ctx_l.format)
    return solve_sylv_tri(T_A, T_B, F_l, ctx_l)


def mp_orth(p: SylvesterProblem, cfg: RefinementConfig,
            counter: FlopCounter | None = None,
            y0_zero: bool = False) -> SolveReport:
    """Mixed-precision solver that re-orthonormalizes the Schur factors.

    Schur decompositions run in the low precision; their unitary factors
    are QR-factorized (modified Gram-Schmidt, positive diagonal) in the
    high precision and the refined triangular solution is recovered with
    the orthonormalized factors.  A singular triangular equation at the
    initial solve is reported as a typed failure, not raised; with
    ``y0_zero`` the failed initial solve is replaced by a zero start
    instead (an experimentation override, off by default).
    """
    ctx_l = PrecisionContext(cfg.u_l, counter, "low")
    ctx_h = PrecisionContext(cfg.u_h, counter, "high")
    sf_A, sf_B = _low_precision_schur_pair(p, ctx_l)
    qr_A = mgs_qr(sf_A.U, ctx_h)
    qr_B = qr_A if p.kind == "lyapunov" else mgs_qr(sf_B.U, ctx_h)
    Q_A, Q_B = qr_A.Q, qr_B.Q
    C = _round_complex_array(p.C, ctx_h.format)
    A = _round_complex_array(p.A, ctx_h.format)
    F = gemm(1.0, gemm(1.0, Q_A.conj().T, C, 0.0, None, ctx_h), Q_B, 0.0, None, ctx_h)
    L_A = fl_sub(gemm(1.0, gemm(1.0, Q_A.conj().T, A, 0.0, None, ctx_h),
                      Q_A, 0.0, None, ctx_h), sf_A.T, ctx_h)
    if p.kind == "lyapunov":
        L_B = L_A.conj().T.copy()
    else:
        B = _round_complex_array(p.B, ctx_h.format)
        L_B = fl_sub(gemm(1.0, gemm(1.0, Q_B.conj().T, B, 0.0, None, ctx_h),
                          Q_B, 0.0, None, ctx_h), sf_B.T, ctx_h)
    try:
        Y0 = _initial_triangular_solve(sf_A.T, sf_B.T, F, ctx_l)
    except (SingularEquationError, NumericBreakdownError) as exc:
        if not y0_zero:
            return _failed_report(
                p, f"{_failure_name(exc)} at initial triangular solve: {exc}")
        Y0 = np.zeros((p.m, p.n), dtype=np.complex128)
    try:
        inner = solve_pert_sylv_tri_stat(sf_A.T, L_A, sf_B.T, L_B, F, Y0, cfg, counter)
    except SingularEquationError as exc:
        return _failed_report(p, f"singular_equation during refinement: {exc}")
    X = gemm(1.0, gemm(1.0, Q_A, inner.X, 0.0, None, ctx_h),
             Q_B.conj().T, 0.0, None, ctx_h)
    return SolveReport(X, inner.iterations, inner.correction_norms,
                       residual(p, X), inner.converged, inner.failure)


def mp_inv(p: SylvesterProblem, cfg: RefinementConfig,
           counter: FlopCounter | None = None,
           y0_zero: bool = False) -> SolveReport:
    """Mixed-precision solver that inverts the Schur factors through LU.

    Identical to `mp_orth` except that the near-unitary factors are LU
    factorized in the high precision and all factor applications on the
    recovery side become triangular solves.
    """
    ctx_l = PrecisionContext(cfg.u_l, counter, "low")
    ctx_h = PrecisionContext(cfg.u_h, counter, "high")
    sf_A, sf_B = _low_precision_schur_pair(p, ctx_l)
    lu_A = lu(sf_A.U.conj().T, ctx_h)
    lu_B = None if p.kind == "lyapunov" else lu(sf_B.U, ctx_h)
    C = _round_complex_array(p.C, ctx_h.format)
    A = _round_complex_array(p.A, ctx_h.format)
    U_A, U_B = sf_A.U, sf_B.U
    F = gemm(1.0, gemm(1.0, U_A.conj().T, C, 0.0, None, ctx_h), U_B, 0.0, None, ctx_h)
    W = gemm(1.0, U_A.conj().T, A, 0.0, None, ctx_h)
    L_A = fl_sub(lu_solve(lu_A, W, side="right", transpose="no", ctx=ctx_h),
                 sf_A.T, ctx_h)
    if p.kind == "lyapunov":
        L_B = L_A.conj().T.copy()
    else:
        B = _round_complex_array(p.B, ctx_h.format)
        W = gemm(1.0, B, U_B, 0.0, None, ctx_h)
        L_B = fl_sub(lu_solve(lu_B, W, side="left", transpose="no", ctx=ctx_h),
                     sf_B.T, ctx_h)
    try:
        Y0 = _initial_triangular_solve(sf_A.T, sf_B.T, F, ctx_l)
    except (SingularEquationError, NumericBreakdownError) as exc:
        if not y0_zero:
            return _failed_report(
                p, f"{_failure_name(exc)} at initial triangular solve: {exc}")
        Y0 = np.zeros((p.m, p.n), dtype=np.complex128)
    try:
        inner = solve_pert_sylv_tri_stat(sf_A.T, L_A, sf_B.T, L_B, F, Y0, cfg, counter)
    except SingularEquationError as exc:
        return _failed_report(p, f"singular_equation during refinement: {exc}")
    Z = lu_solve(lu_A, inner.X, side="left", transpose="no", ctx=ctx_h)
    if p.kind == "lyapunov":
        X = lu_solve(lu_A, Z, side="right", transpose="conj", ctx=ctx_h)
    else:
        X = lu_solve(lu_B, Z, side="right", transpose="no", ctx=ctx_h)
    return SolveReport(X, inner.iterations, inner.correction_norms,
                       residual(p, X), inner.converged, inner.failure)


def _failure_name(exc: Exception) -> str:
    if isinstance(exc, SingularEquationError):
        return "singular_equation"
    return "nan_breakdown"


@dataclass(frozen=True)
class ConvergenceRegime:
    threshold: float
    in_regime: bool
    expected_backward: float
    expected_forward_factor: float


def check_convergence_regime(u_l: FpFormat, u_h: FpFormat,
                             kappa_inf: float) -> ConvergenceRegime:
    """Condition-number threshold below which refinement is expected to work.

    The threshold is the power of ten just above 1/u_l (bfloat16 -> 1e3,
    binary16 and tf32 -> 1e4, binary32 -> 1e8).  Within the regime the
    limiting relative residual is of order u_h and the limiting forward
    error of order cond * u_h.
    """
    u = u_l.unit_roundoff
    threshold = 10.0 ** math.ceil(-math.log10(u) - 1e-12)
    return ConvergenceRegime(
        threshold=threshold,
        in_regime=bool(kappa_inf <= threshold),
        expected_backward=u_h.unit_roundoff,
        expected_forward_factor=u_h.unit_roundoff,
    )
