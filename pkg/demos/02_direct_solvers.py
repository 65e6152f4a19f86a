"""Direct solution of A X + X B = C and the Lyapunov and Hermitian paths.

Solves a small equation three ways and checks everything against the
stacked-columns linear system, which is small enough to form explicitly.
"""

import numpy as np

from mpsylv import (
    SylvesterProblem,
    bartels_stewart,
    residual,
    solve_hermitian,
    sylvester_kron_operator,
    unvec,
    vec,
)

rng = np.random.default_rng(7)
m, n = 8, 5

A = rng.standard_normal((m, m))
B = rng.standard_normal((n, n))
C = rng.standard_normal((m, n))
p = SylvesterProblem(A, B, C)

X, report = bartels_stewart(p)
print(f"general {m}x{n} problem: relative residual = {report.residual:.2e}")

Mf = sylvester_kron_operator(A, B)
X_kron = unvec(np.linalg.solve(Mf, vec(p.C)), m, n)
print(f"agreement with the explicit {m * n}x{m * n} linear system: "
      f"{np.linalg.norm(X - X_kron) / np.linalg.norm(X_kron):.2e}")

# Lyapunov: one Schur decomposition serves both coefficients, and a
# Hermitian right-hand side gives a Hermitian solution
A = rng.standard_normal((6, 6)) + 4 * np.eye(6)
G = rng.standard_normal((6, 6))
C = (G + G.T) / 2
pl = SylvesterProblem(A, A.conj().T, C, kind="lyapunov")
X, report = bartels_stewart(pl)
print(f"\nlyapunov residual = {report.residual:.2e}, "
      f"Hermitian drift = {np.linalg.norm(X - X.conj().T):.2e}")
print(f"one Schur decomposition reused: {report.schur_B.U is report.schur_A.U}")

# Hermitian coefficients: eigendecompose, divide entrywise, transform back
G = rng.standard_normal((7, 7))
A = (G + G.T) / 2 + 4 * np.eye(7)
G = rng.standard_normal((5, 5))
B = (G + G.T) / 2 + 4 * np.eye(5)
C = rng.standard_normal((7, 5))
ph = SylvesterProblem(A, B, C, kind="hermitian")
Xh = solve_hermitian(ph)
Xg, _ = bartels_stewart(SylvesterProblem(A, B, C))
print(f"\nhermitian fast path vs general path: "
      f"{np.linalg.norm(Xh - Xg) / np.linalg.norm(Xg):.2e}")
print(f"hermitian path residual = {residual(ph, Xh):.2e}")
