"""Schur-preconditioned GMRES refinement, both inner-precision variants.

The preconditioner is the inverse Sylvester operator assembled from the
low-precision Schur factors and applied implicitly (two unitary
transforms around a triangular solve).  Running the inner solver in the
high precision buys a visibly wider conditioning range than running it
in the low precision.
"""

import numpy as np

from mpsylv import (
    BINARY32,
    BINARY64,
    GmresConfig,
    ProblemGenerator,
    RefinementConfig,
    generate,
    gmres_ir_sylv,
)

rcfg = RefinementConfig(u_l=BINARY32, u_h=BINARY64)

print("               inner solver in binary32     inner solver in binary64")
print("conditioning   residual   outer/inner       residual   outer/inner")
for t in (0.0, 2.0, 4.0, 6.0, 8.0):
    p = generate(ProblemGenerator("logspace-conditioned", 10, 10, t, seed=5))
    cells = []
    for u_g in (BINARY32, BINARY64):
        rep = gmres_ir_sylv(p, GmresConfig(u_g=u_g), rcfg)
        res = rep.residual_history[-1] if rep.residual_history else float("nan")
        tag = "" if rep.failure is None else "!"
        cells.append(f"{res:9.1e}{tag}  {rep.outer_iterations}/{sum(rep.inner_iterations):<3}")
    print(f"t = {t:4.1f}       {cells[0]:<26} {cells[1]}")

print("\n'!' marks a run that ended in stagnation or non-convergence.")
print("With an exact (binary64) preconditioner the operator is nearly the")
print("identity and GMRES needs one or two iterations per correction:")
p = generate(ProblemGenerator("logspace-conditioned", 10, 10, 1.0, seed=5))
rep = gmres_ir_sylv(p, GmresConfig(u_g=BINARY64),
                    RefinementConfig(BINARY64, BINARY64))
print(f"  inner iteration counts per outer step: {rep.inner_iterations}")
