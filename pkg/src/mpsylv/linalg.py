"""Dense complex linear algebra executable under a precision context.

All matrices are dense ``complex128`` ndarrays.  Every factorization and
product here can run under a :class:`~mpsylv.precision.PrecisionContext`,
in which case each scalar operation is rounded into the context's format;
under a binary64 context the kernels reduce to ordinary double arithmetic.

Explicit Kronecker forms (`sylvester_kron_operator`, `kron_matrix`) are
intended for oracles and diagnostics only and are capped in size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionError,
    FormatOverflowError,
    IterationLimitError,
    NotHermitianError,
    RankDeficiencyError,
    SingularMatrixError,
)
from .precision import (
    BINARY64,
    FpFormat,
    PrecisionContext,
    fl_add,
    fl_div,
    fl_mul,
    fl_sub,
    _csqrt,
    _round_complex_array,
    _sabs,
    _sadd,
    _sdiv,
    _smul,
    _ssqrt,
    _ssub,
)

__all__ = [
    "DEFAULT_KRON_CAP",
    "SchurFactors",
    "LuFactors",
    "QrFactors",
    "as_matrix",
    "vec",
    "unvec",
    "gemm",
    "norm",
    "householder_qr",
    "mgs_qr",
    "lu",
    "lu_solve",
    "schur",
    "hermitian_eig",
    "kron_matrix",
    "sylvester_kron_operator",
    "cond_inf",
    "sep_f",
]

DEFAULT_KRON_CAP = 4096

_CTX64 = PrecisionContext(BINARY64)


@dataclass(frozen=True)
class SchurFactors:
    """Unitary factor U and upper-triangular factor T, with provenance."""

    U: np.ndarray
    T: np.ndarray
    computed_in: FpFormat


@dataclass(frozen=True)
class LuFactors:
    """L and U packed in one matrix (unit lower diagonal implicit), row pivots."""

    lu: np.ndarray
    pivots: np.ndarray  # pivots[k] = row swapped with k at step k


@dataclass(frozen=True)
class QrFactors:
    Q: np.ndarray
    R: np.ndarray


def as_matrix(A) -> np.ndarray:
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim != 2 or M.size == 0:
        raise DimensionError(f"expected a nonempty 2-d matrix, got shape {M.shape}")
    return M


def vec(X: np.ndarray) -> np.ndarray:
    """Stack the columns of X into one vector."""
    return as_matrix(X).flatten(order="F")


def unvec(x: np.ndarray, m: int, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128).ravel()
    if x.size != m * n:
        raise DimensionError(f"cannot reshape length {x.size} into {m}x{n}")
    return x.reshape((m, n), order="F")


def _enter(A: np.ndarray, ctx: PrecisionContext, what: str = "matrix") -> np.ndarray:
    """Round a matrix into the context's format, rejecting overflow."""
    R = _round_complex_array(as_matrix(A), ctx.format)
    if not np.isfinite(R).all() and np.isfinite(np.asarray(A)).all():
        raise FormatOverflowError(
            f"{what} has entries not representable in {ctx.format.name}")
    return R


# ---------------------------------------------------------------------------
# products and norms

def gemm(alpha, A, B, beta, C, ctx: PrecisionContext = _CTX64) -> np.ndarray:
    """fl(alpha*A@B + beta*C) with a fixed ascending-k accumulation order.

    The k loop is innermost and ascending, so results are deterministic
    and reproducible in every format.  ``C`` may be None when beta == 0.
    """
    A = as_matrix(A)
    B = as_matrix(B)
    m, k = A.shape
    k2, n = B.shape
    if k != k2:
        raise DimensionError(f"inner dimensions differ: {A.shape} @ {B.shape}")
    if C is None:
        if beta != 0:
            raise DimensionError("C is required when beta != 0")
        C = np.zeros((m, n), dtype=np.complex128)
    else:
        C = as_matrix(C)
        if C.shape != (m, n):
            raise DimensionError(f"C has shape {C.shape}, expected {(m, n)}")
    acc = np.zeros((m, n), dtype=np.complex128)
    for p in range(k):
        acc = fl_add(acc, fl_mul(A[:, p:p + 1], B[p:p + 1, :], ctx), ctx)
    if alpha != 1:
        acc = fl_mul(alpha, acc, ctx)
    if beta == 0:
        return acc
    if beta != 1:
        return fl_add(acc, fl_mul(beta, C, ctx), ctx)
    return fl_add(acc, C, ctx)


def _norm_two(M: np.ndarray, tol: float = 1e-10, max_iter: int = 1000) -> float:
    """Largest singular value by power iteration on M*M."""
    if not np.any(M):
        return 0.0
    n = M.shape[1]
    v = np.linspace(1.0, 2.0, n).astype(np.complex128)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = M.conj().T @ (M @ v)
        lam_new = float(np.real(np.vdot(v, w)))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
            lam = lam_new
            break
        lam = lam_new
    return float(np.sqrt(max(lam, 0.0)))


def norm(M, kind: str = "frobenius") -> float:
    """Matrix norm, always evaluated in binary64.

    ``kind`` is one of ``frobenius``, ``inf``, ``one``, ``two``.  The
    two-norm runs a power iteration on M*M (tolerance 1e-10, at most 1000
    iterations).
    """
    M = as_matrix(M)
    if kind == "frobenius":
        return float(np.linalg.norm(M))
    if kind == "inf":
        return float(np.abs(M).sum(axis=1).max())
    if kind == "one":
        return float(np.abs(M).sum(axis=0).max())
    if kind == "two":
        return _norm_two(M)
    raise ValueError(f"unknown norm kind {kind!r}")


def _dot(x: np.ndarray, y: np.ndarray, ctx: PrecisionContext) -> complex:
    """conj(x).y accumulated in ascending index order under ctx."""
    if ctx.format.is_binary64:
        ctx.count(2 * len(x))
        return complex(np.vdot(x, y))
    fmt = ctx.format
    ctx.count(2 * len(x))
    acc = 0j
    for i in range(len(x)):
        acc = _sadd(acc, _smul(complex(x[i]).conjugate(), complex(y[i]), fmt), fmt)
    return acc


def _vec_norm2_ctx(x: np.ndarray, ctx: PrecisionContext) -> float:
    """Euclidean vector norm composed from rounded square/add/sqrt steps."""
    if ctx.format.is_binary64:
        ctx.count(2 * len(x) + 1)
        return float(np.linalg.norm(x))
    fmt = ctx.format
    ctx.count(2 * len(x) + 1)
    acc = 0.0
    for i in range(len(x)):
        acc = _sadd(acc, _sabs(complex(x[i]), fmt) ** 2, fmt).real
        # |x_i|^2 as two rounded squares and one rounded add
    return _ssqrt(acc, fmt)


# ---------------------------------------------------------------------------
# QR factorizations

def _fix_r_diagonal(Q: np.ndarray, R: np.ndarray, ctx: PrecisionContext):
    """Rescale columns of Q and rows of R so diag(R) is real and positive."""
    k = min(R.shape)
    for j in range(k):
        d = complex(R[j, j])
        if d == 0:
            continue
        a = abs(d)
        phase = d / a
        if phase != 1.0:
            R[j, j:] = fl_mul(np.conj(phase), R[j, j:], ctx)
            Q[:, j] = fl_mul(phase, Q[:, j], ctx)
        R[j, j] = R[j, j].real
    return Q, R


def _check_rank(R: np.ndarray, A: np.ndarray, ctx: PrecisionContext):
    k = min(R.shape)
    dmin = min(abs(R[j, j]) for j in range(k))
    if dmin <= R.shape[1] * ctx.format.unit_roundoff * float(np.linalg.norm(A)):
        raise RankDeficiencyError(
            f"input is numerically rank deficient (min |R_jj| = {dmin:.3e})")


def mgs_qr(A, ctx: PrecisionContext = _CTX64) -> QrFactors:
    """Modified Gram-Schmidt QR with a positive real diagonal of R."""
    A = _enter(A, ctx, "qr input")
    m, n = A.shape
    if m < n:
        raise DimensionError("mgs_qr requires rows >= cols")
    Q = A.copy()
    R = np.zeros((n, n), dtype=np.complex128)
    for j in range(n):
        v = Q[:, j]
        for i in range(j):
            r = _dot(Q[:, i], v, ctx)
            R[i, j] = r
            v = fl_sub(v, fl_mul(r, Q[:, i], ctx), ctx)
        nv = _vec_norm2_ctx(v, ctx)
        R[j, j] = nv
        if nv == 0.0:
            raise RankDeficiencyError(f"zero column norm at column {j}")
        Q[:, j] = fl_div(v, nv, ctx)
    Q, R = _fix_r_diagonal(Q, R, ctx)
    _check_rank(R, A, ctx)
    return QrFactors(Q, R)


def _make_reflector(x: np.ndarray, ctx: PrecisionContext):
    """Householder vector w and real beta with (I - beta w w*) x = -phase*|x| e1."""
    fmt = ctx.format
    nx = _vec_norm2_ctx(x, ctx)
    if nx == 0.0:
        return None, 0.0, 0j
    x0 = complex(x[0])
    a0 = _sabs(x0, fmt)
    phase = _sdiv(x0, a0, fmt) if a0 != 0.0 else 1 + 0j
    w = x.copy()
    w[0] = _sadd(x0, _smul(phase, nx, fmt), fmt)
    # w*w = 2 nx (nx + |x0|), real by construction
    ww = _smul(2.0, _smul(nx, _sadd(nx, a0, fmt), fmt), fmt).real
    ctx.count(3)
    beta = _sdiv(2.0, ww, fmt).real
    head = _smul(-1.0, _smul(phase, nx, fmt), fmt)
    return w, beta, head


def _apply_reflector_left_rounded(M: np.ndarray, w: np.ndarray, beta: float,
                                  ctx: PrecisionContext) -> np.ndarray:
    """M <- (I - beta w w*) M, rows matching len(w)."""
    t = np.zeros(M.shape[1], dtype=np.complex128)
    for i in range(len(w)):
        t = fl_add(t, fl_mul(complex(w[i]).conjugate(), M[i, :], ctx), ctx)
    bw = fl_mul(beta, w, ctx)
    return fl_sub(M, fl_mul(bw[:, None], t[None, :], ctx), ctx)


def _apply_reflector_right_rounded(M: np.ndarray, w: np.ndarray, beta: float,
                                   ctx: PrecisionContext) -> np.ndarray:
    """M <- M (I - beta w w*), columns matching len(w)."""
    t = np.zeros(M.shape[0], dtype=np.complex128)
    for i in range(len(w)):
        t = fl_add(t, fl_mul(M[:, i], complex(w[i]), ctx), ctx)
    bw = fl_mul(beta, np.conj(w), ctx)
    return fl_sub(M, fl_mul(t[:, None], bw[None, :], ctx), ctx)


def householder_qr(A, ctx: PrecisionContext = _CTX64) -> QrFactors:
    """Householder QR with a positive real diagonal of R."""
    A = _enter(A, ctx, "qr input")
    m, n = A.shape
    if m < n:
        raise DimensionError("householder_qr requires rows >= cols")
    R = A.copy()
    reflectors = []
    for j in range(min(m, n)):
        w, beta, head = _make_reflector(R[j:, j].copy(), ctx)
        if w is None:
            raise RankDeficiencyError(f"zero column at {j}")
        R[j:, j:] = _apply_reflector_left_rounded(R[j:, j:], w, beta, ctx)
        R[j, j] = head
        R[j + 1:, j] = 0.0
        reflectors.append((j, w, beta))
    Q = np.eye(m, dtype=np.complex128)
    for j, w, beta in reversed(reflectors):
        Q[j:, j:] = _apply_reflector_left_rounded(Q[j:, j:], w, beta, ctx)
    Q = Q[:, :n].copy()
    R = R[:n, :].copy()
    np_triu_inplace(R)
    Q, R = _fix_r_diagonal(Q, R, ctx)
    _check_rank(R, A, ctx)
    return QrFactors(Q, R)


def np_triu_inplace(R: np.ndarray) -> None:
    R[np.tril_indices(R.shape[0], -1)] = 0.0


# ---------------------------------------------------------------------------
# LU

def lu(A, ctx: PrecisionContext = _CTX64) -> LuFactors:
    """LU with partial pivoting; L unit lower and U packed together."""
    A = _enter(A, ctx, "lu input")
    m, n = A.shape
    if m != n:
        raise DimensionError("lu requires a square matrix")
    W = A.copy()
    piv = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(W[k:, k])))
        if W[p, k] == 0:
            raise SingularMatrixError(f"exactly zero pivot at step {k}")
        piv[k] = p
        if p != k:
            W[[k, p], :] = W[[p, k], :]
        W[k + 1:, k] = fl_div(W[k + 1:, k], W[k, k], ctx)
        if k + 1 < n:
            W[k + 1:, k + 1:] = fl_sub(
                W[k + 1:, k + 1:],
                fl_mul(W[k + 1:, k:k + 1], W[k:k + 1, k + 1:], ctx), ctx)
    return LuFactors(W, piv)


def _apply_pivots(B: np.ndarray, piv: np.ndarray, inverse: bool = False) -> np.ndarray:
    B = B.copy()
    rng = range(len(piv) - 1, -1, -1) if inverse else range(len(piv))
    for k in rng:
        p = piv[k]
        if p != k:
            B[[k, p], :] = B[[p, k], :]
    return B


def _solve_lower(L: np.ndarray, B: np.ndarray, ctx, unit: bool, conj: bool) -> np.ndarray:
    """Columnwise forward substitution for L X = B (or L* X = B when conj)."""
    n = L.shape[0]
    X = B.copy()
    for i in range(n):
        col = np.conj(L[i, i:]) if conj else L[:, i][i:]
        diag = col[0]
        if not unit:
            if diag == 0:
                raise SingularMatrixError("zero diagonal in triangular solve")
            X[i, :] = fl_div(X[i, :], diag, ctx)
        if i + 1 < n:
            X[i + 1:, :] = fl_sub(X[i + 1:, :],
                                  fl_mul(col[1:, None], X[i:i + 1, :], ctx), ctx)
    return X


def _solve_upper(U: np.ndarray, B: np.ndarray, ctx, unit: bool, conj: bool) -> np.ndarray:
    """Columnwise back substitution for U X = B (or U* X = B when conj)."""
    n = U.shape[0]
    X = B.copy()
    for i in range(n - 1, -1, -1):
        col = np.conj(U[i, :i + 1]) if conj else U[:i + 1, i]
        diag = col[-1]
        if not unit:
            if diag == 0:
                raise SingularMatrixError("zero diagonal in triangular solve")
            X[i, :] = fl_div(X[i, :], diag, ctx)
        if i > 0:
            X[:i, :] = fl_sub(X[:i, :],
                              fl_mul(col[:-1, None], X[i:i + 1, :], ctx), ctx)
    return X


def lu_solve(F: LuFactors, B, side: str = "left", transpose: str = "no",
             ctx: PrecisionContext = _CTX64) -> np.ndarray:
    """Solve A X = B, X A = B, A* X = B or X A* = B from PA = LU factors."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if transpose not in ("no", "conj"):
        raise ValueError("transpose must be 'no' or 'conj'")
    B = as_matrix(B)
    n = F.lu.shape[0]
    if side == "right":
        # X A = B  <=>  A* X* = B*;  X A* = B  <=>  A X* = B*
        inner = "no" if transpose == "conj" else "conj"
        Y = lu_solve(F, B.conj().T, side="left", transpose=inner, ctx=ctx)
        return Y.conj().T
    if B.shape[0] != n:
        raise DimensionError(f"rhs has {B.shape[0]} rows, expected {n}")
    if transpose == "no":
        # A = P^T L U:  solve L Z = P B, then U X = Z
        Z = _apply_pivots(B, F.pivots)
        Z = _solve_lower(F.lu, Z, ctx, unit=True, conj=False)
        return _solve_upper(F.lu, Z, ctx, unit=False, conj=False)
    # A* = U* L* P: solve U* Z = B (lower), L* W = Z (upper), X = P^T W
    Z = _solve_lower(F.lu, B, ctx, unit=False, conj=True)
    W = _solve_upper(F.lu, Z, ctx, unit=True, conj=True)
    return _apply_pivots(W, F.pivots, inverse=True)


# ---------------------------------------------------------------------------
# Schur decomposition

def _hessenberg(A: np.ndarray, ctx: PrecisionContext):
    m = A.shape[0]
    H = A.copy()
    U = np.eye(m, dtype=np.complex128)
    for k in range(m - 2):
        x = H[k + 1:, k].copy()
        if not np.any(x[1:]):
            continue
        w, beta, head = _make_reflector(x, ctx)
        if w is None:
            continue
        H[k + 1:, k:] = _apply_reflector_left_rounded(H[k + 1:, k:], w, beta, ctx)
        H[k + 1:, k] = 0.0
        H[k + 1, k] = head
        H[:, k + 1:] = _apply_reflector_right_rounded(H[:, k + 1:], w, beta, ctx)
        U[:, k + 1:] = _apply_reflector_right_rounded(U[:, k + 1:], w, beta, ctx)
    if m > 2:
        H[np.tril_indices(m, -2)] = 0.0
    return H, U


def _givens(f: complex, g: complex, fmt: FpFormat):
    """Unitary [[c, s], [-conj(s), c]]* zeroing g against f; c real."""
    if g == 0:
        return 1.0, 0j
    if f == 0:
        ag = _sabs(g, fmt)
        return 0.0, _sdiv(g.conjugate(), ag, fmt)
    af = _sabs(f, fmt)
    d2 = _sadd(_smul(af, af, fmt), _smul(_sabs(g, fmt), _sabs(g, fmt), fmt), fmt).real
    d = _ssqrt(d2, fmt)
    c = _sdiv(af, d, fmt).real
    s = _sdiv(_smul(_sdiv(f, af, fmt), g.conjugate(), fmt), d, fmt)
    return c, s


def _rot_rows(H: np.ndarray, k: int, c: float, s: complex, j0: int, j1: int,
              ctx: PrecisionContext):
    r1 = H[k, j0:j1]
    r2 = H[k + 1, j0:j1]
    new1 = fl_add(fl_mul(c, r1, ctx), fl_mul(s, r2, ctx), ctx)
    new2 = fl_sub(fl_mul(c, r2, ctx), fl_mul(np.conj(s), r1, ctx), ctx)
    H[k, j0:j1] = new1
    H[k + 1, j0:j1] = new2


def _rot_cols(H: np.ndarray, k: int, c: float, s: complex, i0: int, i1: int,
              ctx: PrecisionContext):
    c1 = H[i0:i1, k]
    c2 = H[i0:i1, k + 1]
    new1 = fl_add(fl_mul(c, c1, ctx), fl_mul(np.conj(s), c2, ctx), ctx)
    new2 = fl_sub(fl_mul(c, c2, ctx), fl_mul(s, c1, ctx), ctx)
    H[i0:i1, k] = new1
    H[i0:i1, k + 1] = new2


def _wilkinson_shift(H: np.ndarray, hi: int, fmt: FpFormat) -> complex:
    a = complex(H[hi - 1, hi - 1])
    b = complex(H[hi - 1, hi])
    c = complex(H[hi, hi - 1])
    d = complex(H[hi, hi])
    delta = _smul(0.5, _ssub(a, d, fmt), fmt)
    disc = _csqrt(_sadd(_smul(delta, delta, fmt), _smul(b, c, fmt), fmt), fmt)
    # pick the root of the 2x2 closest to d: align disc with delta
    if (delta.real * disc.real + delta.imag * disc.imag) < 0:
        disc = -disc
    denom = _sadd(delta, disc, fmt)
    if denom == 0:
        return d
    return _ssub(d, _sdiv(_smul(b, c, fmt), denom, fmt), fmt)


def schur(A, ctx: PrecisionContext = _CTX64) -> SchurFactors:
    """Complex Schur form A = U T U* via Hessenberg reduction followed by
    a single-shift QR iteration with Wilkinson shifts.

    A subdiagonal entry deflates (is set to exact zero) once its magnitude
    drops below u*(|h_kk| + |h_k+1,k+1|) with u the context's unit roundoff.
    Raises IterationLimitError after 30*m sweeps.
    """
    A = _enter(A, ctx, "schur input")
    m = A.shape[0]
    if A.shape[0] != A.shape[1]:
        raise DimensionError("schur requires a square matrix")
    fmt = ctx.format
    if m == 1:
        return SchurFactors(np.eye(1, dtype=np.complex128), A.copy(), fmt)
    H, U = _hessenberg(A, ctx)
    u = fmt.unit_roundoff
    limit = 30 * m
    sweeps = 0
    stuck = 0
    hi = m - 1
    while hi > 0:
        # deflate every negligible subdiagonal in one pass
        for k in range(1, hi + 1):
            if H[k, k - 1] != 0 and abs(H[k, k - 1]) <= u * (
                    abs(H[k - 1, k - 1]) + abs(H[k, k])):
                H[k, k - 1] = 0.0
        if H[hi, hi - 1] == 0:
            hi -= 1
            stuck = 0
            continue
        lo = hi
        while lo > 0 and H[lo, lo - 1] != 0:
            lo -= 1
        if sweeps >= limit:
            raise IterationLimitError(
                f"QR iteration did not converge within {limit} sweeps")
        if stuck > 0 and stuck % 10 == 0:
            # exceptional shift to break a stalled cycle
            shift = complex(abs(H[hi, hi - 1]) + 0.75 * abs(H[hi, hi]))
        else:
            shift = _wilkinson_shift(H, hi, fmt)
        x = _ssub(complex(H[lo, lo]), shift, fmt)
        y = complex(H[lo + 1, lo])
        for k in range(lo, hi):
            c, s = _givens(x, y, fmt)
            j0 = max(lo, k - 1)
            _rot_rows(H, k, c, s, j0, m, ctx)
            _rot_cols(H, k, c, s, 0, min(k + 3, hi + 1), ctx)
            _rot_cols(U, k, c, s, 0, m, ctx)
            if k > lo:
                H[k + 1, k - 1] = 0.0
            if k < hi - 1:
                x = complex(H[k + 1, k])
                y = complex(H[k + 2, k])
        sweeps += 1
        stuck += 1
    T = H
    T[np.tril_indices(m, -1)] = 0.0
    return SchurFactors(U, T, fmt)


# ---------------------------------------------------------------------------
# Hermitian eigendecomposition (cyclic complex Jacobi)

def hermitian_eig(A, ctx: PrecisionContext = _CTX64, max_sweeps: int = 30):
    """Eigendecomposition A = U diag(d) U* of a Hermitian matrix.

    Cyclic Jacobi sweeps; converges when the off-diagonal Frobenius mass
    falls below n*u*||A||_F.
    """
    A = as_matrix(A)
    n = A.shape[0]
    if A.shape[0] != A.shape[1]:
        raise DimensionError("hermitian_eig requires a square matrix")
    nrm = float(np.linalg.norm(A))
    if float(np.linalg.norm(A - A.conj().T)) > 10 * ctx.format.unit_roundoff * max(nrm, 1e-300):
        raise NotHermitianError("input is not Hermitian to working accuracy")
    W = _enter(A, ctx, "eig input")
    fmt = ctx.format
    V = np.eye(n, dtype=np.complex128)
    if n == 1:
        return V, np.array([W[0, 0].real])
    tol = n * fmt.unit_roundoff * max(nrm, 1e-300)
    for _ in range(max_sweeps):
        offmat = W - np.diag(np.diag(W))
        off = float(np.linalg.norm(offmat))
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                w = complex(W[p, q])
                aw = abs(w)
                if aw == 0.0 or aw <= 1e-3 * tol / n:
                    continue
                a = complex(W[p, p]).real
                b = complex(W[q, q]).real
                awr = _sabs(w, fmt)
                phase = _sdiv(w, awr, fmt)
                tau = _sdiv(_ssub(a, b, fmt), _smul(2.0, awr, fmt), fmt).real
                root = _ssqrt(_sadd(1.0, _smul(tau, tau, fmt), fmt).real, fmt)
                if tau >= 0:
                    t = _sdiv(1.0, _sadd(tau, root, fmt), fmt).real
                else:
                    t = _sdiv(-1.0, _ssub(root, tau, fmt), fmt).real
                c = _sdiv(1.0, _ssqrt(_sadd(1.0, _smul(t, t, fmt), fmt).real, fmt), fmt).real
                s = _smul(_smul(t, c, fmt), phase, fmt)
                # similarity with G = [[c, s], [-conj(s), c]] on (p, q)
                rp = W[p, :].copy()
                rq = W[q, :].copy()
                W[p, :] = fl_add(fl_mul(c, rp, ctx), fl_mul(s, rq, ctx), ctx)
                W[q, :] = fl_sub(fl_mul(c, rq, ctx), fl_mul(np.conj(s), rp, ctx), ctx)
                cp = W[:, p].copy()
                cq = W[:, q].copy()
                W[:, p] = fl_add(fl_mul(c, cp, ctx), fl_mul(np.conj(s), cq, ctx), ctx)
                W[:, q] = fl_sub(fl_mul(c, cq, ctx), fl_mul(s, cp, ctx), ctx)
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = fl_add(fl_mul(c, vp, ctx), fl_mul(np.conj(s), vq, ctx), ctx)
                V[:, q] = fl_sub(fl_mul(c, vq, ctx), fl_mul(s, vp, ctx), ctx)
    else:
        raise IterationLimitError(f"Jacobi did not converge in {max_sweeps} sweeps")
    return V, np.real(np.diag(W)).copy()


# ---------------------------------------------------------------------------
# Kronecker utilities and conditioning diagnostics (binary64 only)

def kron_matrix(A, B, cap: int = DEFAULT_KRON_CAP) -> np.ndarray:
    A = as_matrix(A)
    B = as_matrix(B)
    rows = A.shape[0] * B.shape[0]
    cols = A.shape[1] * B.shape[1]
    if max(rows, cols) > cap:
        raise DimensionError(
            f"explicit Kronecker product of size {rows}x{cols} exceeds cap {cap}")
    return np.kron(A, B)


def sylvester_kron_operator(A, B, cap: int = DEFAULT_KRON_CAP) -> np.ndarray:
    """The mn x mn matrix I_n (x) A + B^T (x) I_m acting on vec(X)."""
    A = as_matrix(A)
    B = as_matrix(B)
    m = A.shape[0]
    n = B.shape[0]
    if A.shape[0] != A.shape[1] or B.shape[0] != B.shape[1]:
        raise DimensionError("coefficients must be square")
    if m * n > cap:
        raise DimensionError(f"mn = {m * n} exceeds Kronecker cap {cap}")
    return np.kron(np.eye(n), A) + np.kron(B.T, np.eye(m))


def cond_inf(M) -> float:
    """Infinity-norm condition number via an explicit LU-based inverse."""
    M = as_matrix(M)
    F = lu(M)
    inv = lu_solve(F, np.eye(M.shape[0], dtype=np.complex128))
    return norm(M, "inf") * norm(inv, "inf")


def sep_f(A, B, cap: int = DEFAULT_KRON_CAP, tol: float = 1e-8,
          max_iter: int = 2000) -> float:
    """Smallest singular value of the Sylvester operator for (A, B).

    Zero iff the spectra of A and -B intersect (within the iteration
    tolerance).  Computed by inverse power iteration on M*M where M is the
    explicit Kronecker operator, so the product mn must sit under the cap.
    """
    M = sylvester_kron_operator(A, B, cap=cap)
    try:
        F = lu(M)
    except SingularMatrixError:
        return 0.0
    s = M.shape[0]
    v = np.linspace(1.0, 2.0, s).astype(np.complex128)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = lu_solve(F, v[:, None], transpose="conj")
        w = lu_solve(F, w)
        w = w.ravel()
        lam_new = float(np.linalg.norm(w))
        if lam_new == 0.0 or not np.isfinite(lam_new):
            return 0.0
        v = w / lam_new
        if abs(lam_new - lam) <= tol * lam_new:
            lam = lam_new
            break
        lam = lam_new
    return float(1.0 / np.sqrt(lam))
