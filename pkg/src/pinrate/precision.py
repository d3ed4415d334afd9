"""Working-precision selection.

All extended-precision arithmetic goes through mpmath (binary, arbitrary
significand length). The renewal recursions additionally use exact integer
fixed point with the same number of fractional bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
from mpmath.libmp import to_fixed

MIN_BITS = 64
GUARD_BITS = 64

# decay rate assumed when sizing precision for an untilted law (b = 0)
UNTILTED_RATE = 1.0


def auto_bits(b: float, n_max: int) -> int:
    """P = max(64, ceil(1.5 * b * n_max / ln 2) + 64).

    The delta sequence has magnitude about exp(-b n), and an absolute
    rounding error introduced early in the recursion persists undamped, so
    the fractional bits must exceed b * n_max / ln 2 by a margin.
    """
    rate = b if b > 0 else UNTILTED_RATE
    return max(MIN_BITS, math.ceil(1.5 * rate * n_max / math.log(2)) + GUARD_BITS)


def required_bits(b: float, n_max: int) -> int:
    # smallest precision at which d(n_max) still clears the rounding floor
    rate = b if b > 0 else UNTILTED_RATE
    return math.ceil(rate * n_max / math.log(2)) + 16


@dataclass(frozen=True)
class PrecisionSpec:
    """Either a fixed number of significand bits or ``None`` for auto."""

    bits: int | None = None

    def __post_init__(self):
        if self.bits is not None and self.bits < 53:
            raise ValueError(f"precision must be at least 53 bits, got {self.bits}")

    @classmethod
    def parse(cls, text: str | int | None) -> "PrecisionSpec":
        if text is None or text == "auto":
            return cls(None)
        return cls(int(text))

    @property
    def is_auto(self) -> bool:
        return self.bits is None

    def resolve(self, b: float, n_max: int = 0) -> int:
        if self.bits is None:
            return auto_bits(b, n_max)
        return self.bits

    def __str__(self) -> str:
        return "auto" if self.bits is None else str(self.bits)


def unit(bits: int) -> mpmath.mpf:
    """Precision unit 2**-bits."""
    return mpmath.ldexp(mpmath.mpf(1), -bits)


def to_fixed_int(x, bits: int) -> int:
    """floor(x * 2**bits) as a Python int; mpf inputs are used unrounded."""
    if not isinstance(x, mpmath.mpf):
        x = mpmath.mpf(x)
    return to_fixed(x._mpf_, bits)


def from_fixed_int(v: int, bits: int) -> mpmath.mpf:
    with mpmath.workprec(max(v.bit_length(), 53) + 8):
        return mpmath.mpf((v, -bits))


def decimal_string(x, bits: int | None = None) -> str:
    """Full-precision decimal rendering of a real number."""
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    if not isinstance(x, mpmath.mpf):
        x = mpmath.mpf(x)
    if bits is None:
        bits = max(mpmath.mp.prec, x._mpf_[3] if x else 0)
    digits = max(17, int(math.ceil(bits * math.log10(2))) + 1)
    with mpmath.workdps(digits + 5):
        return mpmath.nstr(x, digits, strip_zeros=True, min_fixed=-4, max_fixed=digits)
