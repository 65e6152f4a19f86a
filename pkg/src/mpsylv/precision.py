"""Software simulation of reduced-precision floating-point arithmetic.

Values are always stored as native ``float64``; "computing in a low
precision" means that the result of every scalar arithmetic operation is
rounded to the nearest value representable in the target format
(round-to-nearest, ties to even).  Complex numbers round their real and
imaginary parts independently; complex multiplication is composed from
four rounded real multiplications and two rounded real additions, and
complex division uses Smith's algorithm with every step rounded.

A format is described by the number of binary digits in the significand
(including the implicit leading bit) and in the exponent.  The predefined
formats are::

    name       significand  exponent   unit roundoff
    bfloat16    8            8          2^-8
    binary16    11           5          2^-11
    tf32        11           8          2^-11
    b24         16           8          2^-16
    binary32    24           8          2^-24
    binary64    53           11         2^-53

Subnormal numbers are supported and rounded with gradual underflow.
Flush-to-zero is not offered.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import PrecisionOverflowWarning

__all__ = [
    "FpFormat",
    "FlopCounter",
    "PrecisionContext",
    "BFLOAT16",
    "BINARY16",
    "TF32",
    "B24",
    "BINARY32",
    "BINARY64",
    "FORMATS",
    "format_from_name",
    "parse_format",
    "round_to",
    "round_complex",
    "round_matrix",
    "fl_add",
    "fl_sub",
    "fl_mul",
    "fl_div",
    "fl_sqrt",
]


@dataclass(frozen=True)
class FpFormat:
    """A binary floating-point format with IEEE-style exponent biasing."""

    name: str
    significand_bits: int  # t, including the implicit leading bit
    exponent_bits: int
    supports_subnormals: bool = True

    def __post_init__(self):
        if self.significand_bits < 2:
            raise ValueError("significand needs at least 2 bits")
        if self.exponent_bits < 2:
            raise ValueError("exponent needs at least 2 bits")
        if not self.supports_subnormals:
            raise ValueError("flush-to-zero semantics are not supported")

    @property
    def unit_roundoff(self) -> float:
        return 2.0 ** -self.significand_bits

    @property
    def emax(self) -> int:
        return 2 ** (self.exponent_bits - 1) - 1

    @property
    def emin(self) -> int:
        return 1 - self.emax

    @property
    def max_finite(self) -> float:
        t = self.significand_bits
        return (2.0 - 2.0 ** (1 - t)) * 2.0**self.emax

    @property
    def smallest_normal(self) -> float:
        return 2.0**self.emin

    @property
    def smallest_subnormal(self) -> float:
        return 2.0 ** (self.emin - self.significand_bits + 1)

    @property
    def is_binary64(self) -> bool:
        return self.significand_bits == 53 and self.exponent_bits == 11

    @classmethod
    def from_bits(cls, significand_bits: int, exponent_bits: int,
                  name: str | None = None) -> "FpFormat":
        if name is None:
            name = f"p{significand_bits}e{exponent_bits}"
        return cls(name, significand_bits, exponent_bits)


BFLOAT16 = FpFormat("bfloat16", 8, 8)
BINARY16 = FpFormat("binary16", 11, 5)
TF32 = FpFormat("tf32", 11, 8)
B24 = FpFormat("b24", 16, 8)
BINARY32 = FpFormat("binary32", 24, 8)
BINARY64 = FpFormat("binary64", 53, 11)

FORMATS = {
    "bfloat16": BFLOAT16,
    "binary16": BINARY16,
    "tf32": TF32,
    "b24": B24,
    "binary32": BINARY32,
    "binary64": BINARY64,
}


def format_from_name(name: str) -> FpFormat:
    try:
        return FORMATS[name.lower()]
    except KeyError:
        raise ValueError(
            f"unknown format {name!r}; known: {sorted(FORMATS)}") from None


def parse_format(spec: str) -> FpFormat:
    """Resolve a format from a name or an explicit ``"t:e"`` bit pair."""
    if ":" in spec:
        t_str, e_str = spec.split(":", 1)
        return FpFormat.from_bits(int(t_str), int(e_str))
    return format_from_name(spec)


class FlopCounter:
    """Accumulates operation counts into named buckets.

    One count unit is one scalar (complex or real) addition, subtraction,
    multiplication, division, or square root.
    """

    def __init__(self):
        self.counts: dict[str, int] = {}

    def add(self, bucket: str, n: int) -> None:
        self.counts[bucket] = self.counts.get(bucket, 0) + n

    def get(self, bucket: str) -> int:
        return self.counts.get(bucket, 0)

    def total(self) -> int:
        return sum(self.counts.values())

    def reset(self) -> None:
        self.counts.clear()

    def __repr__(self):
        inner = ", ".join(f"{k}={v}" for k, v in sorted(self.counts.items()))
        return f"FlopCounter({inner})"


@dataclass(frozen=True)
class PrecisionContext:
    """An immutable arithmetic environment: a format plus optional accounting.

    Every ``fl_*`` operation executed under the context rounds its result
    into ``format`` and, when a counter is attached, charges one flop per
    scalar result to ``bucket``.
    """

    format: FpFormat
    counter: FlopCounter | None = field(default=None, compare=False)
    bucket: str = "high"

    @property
    def unit_roundoff(self) -> float:
        return self.format.unit_roundoff

    def count(self, n: int) -> None:
        if self.counter is not None:
            self.counter.add(self.bucket, n)

    def with_bucket(self, bucket: str) -> "PrecisionContext":
        return PrecisionContext(self.format, self.counter, bucket)


# ---------------------------------------------------------------------------
# rounding kernels

def _round_real_array(x: np.ndarray, fmt: FpFormat,
                      err: np.ndarray | None = None) -> np.ndarray:
    """Round a float64 array to the nearest representable values in fmt.

    ``err`` carries the part of the exact result that was lost when it was
    first rounded to double (a 2Sum residual); it is used only to break
    ties that fall exactly on a midpoint of the target format.
    """
    out = np.array(x, dtype=np.float64, copy=True)
    if fmt.is_binary64:
        return out
    mask = np.isfinite(out) & (out != 0.0)
    if not mask.any():
        return out
    v = out[mask]
    _, e = np.frexp(v)
    # exponent of the leading significand bit, clamped into the subnormal range
    q = np.maximum(e - 1, fmt.emin)
    shift = q - (fmt.significand_bits - 1)
    with np.errstate(over="ignore", invalid="ignore"):
        scaled = np.ldexp(v, -shift)
        r = np.rint(scaled)
        if err is not None:
            ev = np.asarray(err, dtype=np.float64)[mask]
            lo = np.floor(scaled)
            mid = ((scaled - lo) == 0.5) & (ev != 0.0) & np.isfinite(ev)
            if mid.any():
                r[mid] = lo[mid] + (ev[mid] > 0.0)
        y = np.ldexp(r, shift)
    over = np.abs(y) > fmt.max_finite
    if over.any():
        y[over] = np.copysign(np.inf, v[over])
    zero = y == 0.0
    if zero.any():
        y[zero] = np.copysign(0.0, v[zero])
    out[mask] = y
    return out


def _round_real_scalar(x: float, fmt: FpFormat, err: float = 0.0) -> float:
    if fmt.is_binary64 or x == 0.0 or not math.isfinite(x):
        return x
    _, e = math.frexp(x)
    if e - 1 > fmt.emax + 1:
        return math.copysign(math.inf, x)
    q = max(e - 1, fmt.emin)
    shift = q - (fmt.significand_bits - 1)
    scaled = math.ldexp(x, -shift)
    r = round(scaled)
    if err != 0.0 and math.isfinite(err):
        lo = math.floor(scaled)
        if scaled - lo == 0.5:
            r = lo + (1 if err > 0.0 else 0)
    y = math.ldexp(r, shift)
    if abs(y) > fmt.max_finite:
        return math.copysign(math.inf, x)
    if y == 0.0:
        return math.copysign(0.0, x)
    return y


def round_to(x: float, fmt: FpFormat) -> float:
    """Round one double to the nearest value representable in ``fmt``.

    Ties go to even.  Magnitudes past the overflow threshold map to signed
    infinity, magnitudes below half the smallest subnormal to signed zero,
    and NaN stays NaN.  The function is total and idempotent.
    """
    return _round_real_scalar(float(x), fmt)


def _round_complex_array(z: np.ndarray, fmt: FpFormat) -> np.ndarray:
    if fmt.is_binary64:
        return np.array(z, dtype=np.complex128, copy=True)
    re = _round_real_array(np.asarray(z.real, dtype=np.float64), fmt)
    im = _round_real_array(np.asarray(z.imag, dtype=np.float64), fmt)
    return re + 1j * im


def round_complex(z: complex, fmt: FpFormat) -> complex:
    """Round real and imaginary parts of a complex scalar independently."""
    return complex(_round_real_scalar(z.real, fmt),
                   _round_real_scalar(z.imag, fmt))


def round_matrix(M: np.ndarray, fmt: FpFormat) -> np.ndarray:
    """Round every entry of a matrix into ``fmt``.

    Emits a :class:`PrecisionOverflowWarning` if a finite entry overflowed
    to infinity; callers decide whether that is fatal.
    """
    M = np.asarray(M)
    if np.iscomplexobj(M):
        R = _round_complex_array(M.astype(np.complex128), fmt)
        overflowed = (~np.isfinite(R.real) & np.isfinite(M.real)) \
            | (~np.isfinite(R.imag) & np.isfinite(M.imag))
    else:
        R = _round_real_array(M.astype(np.float64), fmt)
        overflowed = ~np.isfinite(R) & np.isfinite(M)
        R = R.astype(np.complex128)
    if overflowed.any():
        warnings.warn(
            f"{int(overflowed.sum())} entries overflowed while rounding "
            f"into {fmt.name}", PrecisionOverflowWarning, stacklevel=2)
    return R


# ---------------------------------------------------------------------------
# rounded arithmetic
#
# The array functions below accept scalars or ndarrays (anything numpy can
# broadcast) and return complex128 results.  Inputs are assumed to be
# already representable in the context's format; callers round operands on
# entry to a low-precision region.

def _unwrap(z: np.ndarray, scalar: bool):
    return complex(z) if scalar else z


def _two_sum(a: np.ndarray, b: np.ndarray):
    """Knuth 2Sum: s + e == a + b exactly, s == fl64(a + b)."""
    with np.errstate(invalid="ignore"):
        s = a + b
        bv = s - a
        e = (a - (s - bv)) + (b - bv)
        return s, np.where(np.isfinite(s), e, 0.0)


def _rounded_sum(a: np.ndarray, b: np.ndarray, fmt: FpFormat) -> np.ndarray:
    """Correctly rounded a + b into fmt (single rounding of the exact sum)."""
    sr, er = _two_sum(a.real, b.real)
    si, ei = _two_sum(a.imag, b.imag)
    return _round_real_array(sr, fmt, er) + 1j * _round_real_array(si, fmt, ei)


def fl_add(a, b, ctx: PrecisionContext):
    scalar = np.ndim(a) == 0 and np.ndim(b) == 0
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    out_shape = np.broadcast_shapes(a.shape, b.shape)
    ctx.count(int(np.prod(out_shape)) if out_shape else 1)
    if ctx.format.is_binary64:
        return _unwrap(a + b, scalar)
    a, b = np.broadcast_arrays(a, b)
    return _unwrap(_rounded_sum(a, b, ctx.format), scalar)


def fl_sub(a, b, ctx: PrecisionContext):
    scalar = np.ndim(a) == 0 and np.ndim(b) == 0
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    out_shape = np.broadcast_shapes(a.shape, b.shape)
    ctx.count(int(np.prod(out_shape)) if out_shape else 1)
    if ctx.format.is_binary64:
        return _unwrap(a - b, scalar)
    a, b = np.broadcast_arrays(a, b)
    return _unwrap(_rounded_sum(a, -b, ctx.format), scalar)


def fl_mul(a, b, ctx: PrecisionContext):
    scalar = np.ndim(a) == 0 and np.ndim(b) == 0
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    out_shape = np.broadcast_shapes(a.shape, b.shape)
    ctx.count(int(np.prod(out_shape)) if out_shape else 1)
    if ctx.format.is_binary64:
        return _unwrap(a * b, scalar)
    fmt = ctx.format
    r = _round_real_array
    ar, ai = a.real, a.imag
    br, bi = b.real, b.imag
    with np.errstate(invalid="ignore", over="ignore"):
        rr = r(ar * br, fmt)
        ii = r(ai * bi, fmt)
        ri = r(ar * bi, fmt)
        ir = r(ai * br, fmt)
        re = r(rr - ii, fmt)
        im = r(ri + ir, fmt)
    return _unwrap(re + 1j * im, scalar)


def fl_div(a, b, ctx: PrecisionContext):
    scalar = np.ndim(a) == 0 and np.ndim(b) == 0
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    out_shape = np.broadcast_shapes(a.shape, b.shape)
    ctx.count(int(np.prod(out_shape)) if out_shape else 1)
    if ctx.format.is_binary64:
        return _unwrap(a / b, scalar)
    fmt = ctx.format
    r = _round_real_array
    a, b = np.broadcast_arrays(a, b)
    ar, ai = a.real, a.imag
    br, bi = b.real, b.imag
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        # Smith's algorithm, branch chosen entrywise on |Re b| vs |Im b|
        swap = np.abs(br) < np.abs(bi)
        num_r = np.where(swap, ai, ar)
        num_i = np.where(swap, ar, ai)
        den_big = np.where(swap, bi, br)
        den_small = np.where(swap, br, bi)
        t = r(den_small / den_big, fmt)
        d = r(den_big + r(den_small * t, fmt), fmt)
        re = r(r(num_r + r(num_i * t, fmt), fmt) / d, fmt)
        im_plain = r(r(num_i - r(num_r * t, fmt), fmt) / d, fmt)
        im = np.where(swap, -im_plain, im_plain)
    return _unwrap(re + 1j * im, scalar)


def fl_sqrt(x, ctx: PrecisionContext):
    """Rounded square root of a nonnegative real array or scalar."""
    scalar = np.ndim(x) == 0
    x = np.asarray(np.real(np.asarray(x)), dtype=np.float64)
    ctx.count(int(np.prod(x.shape)) if x.shape else 1)
    y = np.sqrt(x)
    if not ctx.format.is_binary64:
        y = _round_real_array(y, ctx.format)
    return float(y) if scalar else y


# scalar fast paths used inside factorization inner loops ---------------------

def _two_sum_scalar(a: float, b: float):
    s = a + b
    if not math.isfinite(s):
        return s, 0.0
    bv = s - a
    return s, (a - (s - bv)) + (b - bv)


def _sadd(a: complex, b: complex, fmt: FpFormat) -> complex:
    if fmt.is_binary64:
        return a + b
    sr, er = _two_sum_scalar(a.real, b.real)
    si, ei = _two_sum_scalar(a.imag, b.imag)
    return complex(_round_real_scalar(sr, fmt, er),
                   _round_real_scalar(si, fmt, ei))


def _ssub(a: complex, b: complex, fmt: FpFormat) -> complex:
    if fmt.is_binary64:
        return a - b
    sr, er = _two_sum_scalar(a.real, -b.real)
    si, ei = _two_sum_scalar(a.imag, -b.imag)
    return complex(_round_real_scalar(sr, fmt, er),
                   _round_real_scalar(si, fmt, ei))


def _smul(a: complex, b: complex, fmt: FpFormat) -> complex:
    if fmt.is_binary64:
        return a * b
    r = _round_real_scalar
    rr = r(a.real * b.real, fmt)
    ii = r(a.imag * b.imag, fmt)
    ri = r(a.real * b.imag, fmt)
    ir = r(a.imag * b.real, fmt)
    return complex(r(rr - ii, fmt), r(ri + ir, fmt))


def _sdiv(a: complex, b: complex, fmt: FpFormat) -> complex:
    if fmt.is_binary64:
        return a / b
    r = _round_real_scalar
    ar, ai, br, bi = a.real, a.imag, b.real, b.imag
    try:
        if abs(br) >= abs(bi):
            t = r(bi / br, fmt)
            d = r(br + r(bi * t, fmt), fmt)
            return complex(r(r(ar + r(ai * t, fmt), fmt) / d, fmt),
                           r(r(ai - r(ar * t, fmt), fmt) / d, fmt))
        t = r(br / bi, fmt)
        d = r(bi + r(br * t, fmt), fmt)
        return complex(r(r(ai + r(ar * t, fmt), fmt) / d, fmt),
                       -r(r(ar - r(ai * t, fmt), fmt) / d, fmt))
    except ZeroDivisionError:
        c = np.complex128(a) / np.complex128(b)
        return complex(c)


def _ssqrt(x: float, fmt: FpFormat) -> float:
    if fmt.is_binary64:
        return math.sqrt(x)
    return _round_real_scalar(math.sqrt(x), fmt)


def _sabs(z: complex, fmt: FpFormat) -> float:
    """|z| composed from rounded square, add, sqrt steps."""
    if fmt.is_binary64:
        return abs(z)
    r = _round_real_scalar
    s = r(r(z.real * z.real, fmt) + r(z.imag * z.imag, fmt), fmt)
    if not math.isfinite(s):
        return math.inf
    return _ssqrt(s, fmt)


def _csqrt(z: complex, fmt: FpFormat) -> complex:
    """Principal complex square root composed from rounded real steps."""
    if fmt.is_binary64:
        c = np.sqrt(np.complex128(z))
        return complex(c)
    if z == 0:
        return 0j
    r = _round_real_scalar
    a, b = z.real, z.imag
    mag = _sabs(z, fmt)
    if a >= 0.0:
        u = _ssqrt(r(r(mag + a, fmt) / 2.0, fmt), fmt)
        if u == 0.0:
            return complex(0.0, b)
        v = r(b / r(2.0 * u, fmt), fmt)
        return complex(u, v)
    v = _ssqrt(r(r(mag - a, fmt) / 2.0, fmt), fmt)
    v = math.copysign(v, b if b != 0.0 else 1.0)
    if v == 0.0:
        return complex(0.0, 0.0)
    u = r(b / r(2.0 * v, fmt), fmt)
    return complex(u, v)
