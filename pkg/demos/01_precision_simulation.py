"""Tour of the simulated floating-point formats.

Rounds a few handpicked values into each format and probes the unit
roundoff the way a paranoid numerical analyst would: by adding it to one.
"""

import numpy as np

from mpsylv import (
    FORMATS,
    PrecisionContext,
    fl_add,
    fl_mul,
    round_matrix,
    round_to,
)

print("format      t   e   unit roundoff   max finite")
for name, fmt in FORMATS.items():
    print(f"{name:<10} {fmt.significand_bits:>3} {fmt.exponent_bits:>3}"
          f"   {fmt.unit_roundoff:.2e}      {fmt.max_finite:.3e}")

print("\nRounding 0.1 into each format:")
for name, fmt in FORMATS.items():
    print(f"  {name:<10} -> {round_to(0.1, fmt)!r}")

print("\nUnit roundoff realization, fl(1 + u) vs fl(1 + u(1 + 2^-30)):")
for name, fmt in FORMATS.items():
    ctx = PrecisionContext(fmt)
    at_tie = fl_add(1.0, fmt.unit_roundoff, ctx).real
    above = fl_add(1.0, fmt.unit_roundoff * (1 + 2.0**-30), ctx).real
    print(f"  {name:<10} tie -> {at_tie!r:>22}   just above -> {above!r}")

print("\nOverflow: binary16 tops out at 65504")
b16 = FORMATS["binary16"]
for x in (65504.0, 65519.0, 65520.0, 70000.0):
    print(f"  round_to({x}) = {round_to(x, b16)}")

print("\nA matrix entering a low-precision region is rounded entrywise:")
M = np.array([[1 / 3, 2 / 3], [0.1, 1e-9]])
print(round_matrix(M, FORMATS["bfloat16"]).real)

print("\nEvery arithmetic result is rounded, so products drift visibly:")
ctx = PrecisionContext(FORMATS["bfloat16"])
x = 1.0
for _ in range(5):
    x = fl_mul(x, 1.1, ctx).real
print(f"  five bfloat16 multiplications by 1.1: {x!r}")
print(f"  the binary64 value would be          {1.1**5!r}")
