"""Circle arithmetic: wrapping, distances, lifts, exact rotation sequences.

Angles live on the circle R/Z and are represented by floats in [0, 1).
Driving frequencies need more care than a float carries: n*omega mod 1
loses everything near n ~ 1e8 in doubles, and the recurrence checks here
scan n up to 1e6 with margins around 1e-7. Frequency therefore keeps omega
as a fixed-point integer with 120 fractional bits and does all rotation
arithmetic on exact integers, converting to float only at the very end.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

SCALE_BITS = 120
_ONE = 1 << SCALE_BITS


def wrap(x):
    """Reduce to [0, 1). Scalars in, float out; arrays in, array out."""
    y = np.mod(x, 1.0)
    if np.ndim(y) == 0:
        y = float(y)
        # np.mod rounds tiny negatives up to exactly 1.0
        return 0.0 if y == 1.0 else y
    y[y == 1.0] = 0.0
    return y


def circle_dist(x, y=0.0):
    """d(x, y) = min(|x - y| mod 1, 1 - |x - y| mod 1), in [0, 1/2]."""
    d = np.mod(np.asarray(x, dtype=float) - np.asarray(y, dtype=float), 1.0)
    out = np.minimum(d, 1.0 - d)
    if out.ndim == 0:
        return float(out)
    return out


def lift_half(x):
    """The representative of x mod 1 in (-1/2, 1/2]."""
    x = np.asarray(x, dtype=float)
    out = x - np.ceil(x - 0.5)
    if out.ndim == 0:
        return float(out)
    return out


class Frequency:
    """A driving frequency held to 120 fractional bits.

    multiple(k) and rotations(...) form the integer product k*bits mod 2^120
    first and divide at the end, so the angle after a million rotation steps
    carries no accumulated rounding at all (only the one final float
    conversion, < 2^-53 relative).
    """

    __slots__ = ("bits",)

    def __init__(self, bits: int):
        self.bits = bits % _ONE

    @classmethod
    def golden(cls) -> "Frequency":
        # (sqrt(5) - 1) / 2
        return cls((math.isqrt(5 << (2 * SCALE_BITS)) - _ONE) // 2)

    @classmethod
    def silver(cls) -> "Frequency":
        # sqrt(2) - 1
        return cls(math.isqrt(2 << (2 * SCALE_BITS)) - _ONE)

    @classmethod
    def from_fraction(cls, num: int, den: int) -> "Frequency":
        if den <= 0:
            raise ValueError("denominator must be positive")
        return cls(round(Fraction(num, den) % 1 * _ONE))

    @classmethod
    def from_decimal(cls, text: str) -> "Frequency":
        return cls(round(Fraction(text) % 1 * _ONE))

    @classmethod
    def from_float(cls, value: float) -> "Frequency":
        return cls(round(Fraction(value) % 1 * _ONE))

    @classmethod
    def parse(cls, token: str) -> "Frequency":
        """Accepts the surd tokens 'golden' and 'silver', a decimal string,
        or 'p/q'."""
        token = token.strip()
        if token == "golden":
            return cls.golden()
        if token == "silver":
            return cls.silver()
        if "/" in token:
            num, den = token.split("/", 1)
            return cls.from_fraction(int(num), int(den))
        return cls.from_decimal(token)

    @property
    def value(self) -> float:
        return self.bits / _ONE

    def __float__(self) -> float:
        return self.bits / _ONE

    def __repr__(self) -> str:
        return f"Frequency({self.bits / _ONE!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Frequency) and self.bits == other.bits

    def __hash__(self):
        return hash(("Frequency", self.bits))

    def multiple(self, k: int) -> float:
        """k*omega mod 1, exact in k."""
        m = k * self.bits % _ONE
        v = m / _ONE
        return 0.0 if v == 1.0 else v

    def multiple_dist(self, k: int, offset_num: int = 0, offset_den: int = 1) -> float:
        """Circle distance d(k*omega, offset_num/offset_den), exact in k."""
        m = (k * self.bits - _ONE * offset_num // offset_den) % _ONE
        return min(m, _ONE - m) / _ONE

    def rotations(self, n: int, theta0: float = 0.0) -> np.ndarray:
        """theta0 + k*omega mod 1 for k = 0..n-1 as a float array."""
        t0 = round(Fraction(theta0) % 1 * _ONE)
        step = self.bits

        def gen():
            a = t0
            for _ in range(n):
                yield a
                a = (a + step) % _ONE

        out = np.fromiter(gen(), dtype=np.float64, count=n)
        out /= float(_ONE)
        out[out >= 1.0] = 0.0
        return out
