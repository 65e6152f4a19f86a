"""When is the two-precision route cheaper than the direct solver?

rho is the price of one low-precision flop relative to a high-precision
one.  phi(rho) is the break-even refinement budget; its floor k* is the
most iterations the mixed solver may spend and still win.
"""

import numpy as np

from mpsylv import ALGORITHMS, CostModel, crossover_rho, flops, k_star, phi

print("iteration budgets k* by flop-price ratio (square Sylvester / Lyapunov)")
header = "rho    " + "  ".join(f"{a.replace('mp_', ''):>10}" for a in ALGORITHMS)
print(header)
for rho in np.arange(0.0, 1.01, 0.1):
    cells = []
    for alg in ALGORITHMS:
        cells.append(f"{k_star(CostModel(64, 64, float(rho), alg)):>10}")
    print(f"{rho:4.1f}   " + "  ".join(cells))

print("\nbreak-even flop-price ratios (phi(rho) = k):")
for alg in ALGORITHMS:
    marks = []
    for k in (0, 1, 2, 3):
        c = crossover_rho(alg, 64, 64, k)
        marks.append(f"k={k}: {c.rho:.3f}" + ("*" if c.clamped else ""))
    print(f"  {alg:<14} " + "   ".join(marks))
print("  (* clamped into [0, 1])")

print("\nleading-order flop counts at m = n = 100, two refinement steps:")
for alg in ("mp_orth_sylv", "mp_inv_sylv", "bartels_stewart_sylv"):
    fc = flops(alg, 100, 100, 2)
    print(f"  {alg:<22} low {fc.low_flops:12.4g}   high {fc.high_flops:12.4g}")

print("\nweighted cost at rho = 0.1 (low flops cost a tenth):")
direct = flops("bartels_stewart_sylv", 100, 100).high_flops
for alg in ("mp_orth_sylv", "mp_inv_sylv"):
    fc = flops(alg, 100, 100, 2)
    weighted = 0.1 * fc.low_flops + fc.high_flops
    print(f"  {alg:<14} {weighted:12.4g}  vs direct {direct:12.4g}"
          f"  ({weighted / direct:.0%})")
