"""A compact version of the conditioning experiment behind the sweep CLI.

Generates problems whose stacked operator has kappa_2 near 10^t, runs
every solver on each, and prints the residual table that `mpsylv
sweep-cond` would write as CSV.  Expect the direct solver to stay flat,
the refinement solvers to give out once kappa crosses the binary32
regime, and the low-precision GMRES variant to give out first.

The same data via the command line:

    mpsylv sweep-cond --m 10 --n 10 --t-range 0:8 --seed 1 \
        --ul binary32 --uh binary64 --out sweep.csv --reproducible
"""

import tempfile

from mpsylv import BINARY32, BINARY64, RefinementConfig
from mpsylv.cli import run_sweep_cond

rcfg = RefinementConfig(u_l=BINARY32, u_h=BINARY64)
with tempfile.NamedTemporaryFile(suffix=".csv", delete=False) as fh:
    out = fh.name
rows = run_sweep_cond(10, 10, list(range(0, 9)), seed=1, rcfg=rcfg, out=out,
                      reproducible=True)

print(f"CSV written to {out}\n")
print(" t   kappa*u_h    direct     mp_orth    mp_inv     gmres_ul   gmres_uh  status")
for t, condu, bs, r_or, r_in, r_ul, r_uh, i_or, i_in, status in rows:
    def cell(x):
        return f"{x:9.1e}" if x == x else "      nan"
    print(f"{t:3.0f}  {condu:9.1e}  {cell(bs)}  {cell(r_or)}  {cell(r_in)}"
          f"  {cell(r_ul)}  {cell(r_uh)}  {status}")
