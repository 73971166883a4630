"""Base-2 extended-range floating point scalars.

Order-dependent weight families contain factorial factors such as
(sigma*|u|)! that overflow IEEE doubles long before the computations
they enter become meaningless.  ExtendedReal keeps a double mantissa
normalized to [1, 2) next to an unbounded integer exponent so those
magnitudes stay exact enough (double-precision relative accuracy) at
any scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["ExtendedReal", "RangeError", "xfactorial"]

# Largest |exponent| that still converts to a finite double.
_MAX_FLOAT_EXP = 1023


class RangeError(OverflowError):
    """Conversion to a plain float would overflow or underflow.

    Carries the base-2 magnitude of the offending value so callers can
    report how far out of range the result was.
    """

    def __init__(self, log2_magnitude: float):
        self.log2_magnitude = log2_magnitude
        super().__init__(
            f"value with log2 magnitude {log2_magnitude:.1f} is outside the "
            "plain float range"
        )


@dataclass(frozen=True)
class ExtendedReal:
    """sign * mantissa * 2**exponent with mantissa in [1, 2) or 0."""

    mantissa: float
    exponent: int
    sign: int

    # -- construction ------------------------------------------------------

    @staticmethod
    def from_float(x: float) -> "ExtendedReal":
        if x == 0.0:
            return _ZERO
        if not math.isfinite(x):
            raise ValueError(f"cannot represent {x!r}")
        sign = 1 if x > 0 else -1
        frac, exp = math.frexp(abs(x))  # frac in [0.5, 1)
        return ExtendedReal(2.0 * frac, exp - 1, sign)

    @staticmethod
    def zero() -> "ExtendedReal":
        return _ZERO

    @staticmethod
    def one() -> "ExtendedReal":
        return _ONE

    def __post_init__(self):
        if self.sign == 0:
            if self.mantissa != 0.0:
                raise ValueError("zero must have zero mantissa")
        elif not (1.0 <= self.mantissa < 2.0):
            raise ValueError(f"mantissa {self.mantissa} not normalized")

    # -- queries -----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    @property
    def log2(self) -> float:
        """Base-2 log of the magnitude; -inf for zero."""
        if self.is_zero:
            return -math.inf
        return self.exponent + math.log2(self.mantissa)

    def to_float(self) -> float:
        if self.is_zero:
            return 0.0
        # Doubles cover 2^-1074 (smallest subnormal) through just under
        # 2^1024; anything outside raises the range diagnostic.
        if self.exponent > _MAX_FLOAT_EXP or self.exponent < -1074:
            raise RangeError(self.log2)
        return self.sign * math.ldexp(self.mantissa, self.exponent)

    # -- arithmetic --------------------------------------------------------

    def __neg__(self) -> "ExtendedReal":
        return ExtendedReal(self.mantissa, self.exponent, -self.sign)

    def __abs__(self) -> "ExtendedReal":
        return ExtendedReal(self.mantissa, self.exponent, abs(self.sign))

    def __mul__(self, other) -> "ExtendedReal":
        if not isinstance(other, ExtendedReal):
            other = ExtendedReal.from_float(float(other))
        if self.is_zero or other.is_zero:
            return _ZERO
        m = self.mantissa * other.mantissa  # in [1, 4)
        e = self.exponent + other.exponent
        if m >= 2.0:
            m *= 0.5
            e += 1
        return ExtendedReal(m, e, self.sign * other.sign)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ExtendedReal":
        if not isinstance(other, ExtendedReal):
            other = ExtendedReal.from_float(float(other))
        if other.is_zero:
            raise ZeroDivisionError("ExtendedReal division by zero")
        if self.is_zero:
            return _ZERO
        m = self.mantissa / other.mantissa  # in (0.5, 2)
        e = self.exponent - other.exponent
        if m < 1.0:
            m *= 2.0
            e -= 1
        return ExtendedReal(m, e, self.sign * other.sign)

    def __add__(self, other) -> "ExtendedReal":
        if not isinstance(other, ExtendedReal):
            other = ExtendedReal.from_float(float(other))
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        hi, lo = (self, other) if self.exponent >= other.exponent else (other, self)
        shift = hi.exponent - lo.exponent
        if shift > 64:
            return hi
        # Both terms fit in a double after scaling by 2**-hi.exponent.
        tot = hi.sign * hi.mantissa + lo.sign * math.ldexp(lo.mantissa, -shift)
        if tot == 0.0:
            return _ZERO
        res = ExtendedReal.from_float(tot)
        return ExtendedReal(res.mantissa, res.exponent + hi.exponent, res.sign)

    __radd__ = __add__

    def __sub__(self, other) -> "ExtendedReal":
        if not isinstance(other, ExtendedReal):
            other = ExtendedReal.from_float(float(other))
        return self + (-other)

    def powf(self, t: float) -> "ExtendedReal":
        """self**t for positive self and real t."""
        if self.is_zero:
            if t <= 0:
                raise ValueError("0**t undefined for t <= 0")
            return _ZERO
        if self.sign < 0:
            raise ValueError("powf requires a positive base")
        lg = t * self.log2
        e = math.floor(lg)
        return ExtendedReal(2.0 ** (lg - e), e, 1) if lg - e > 0 else \
            ExtendedReal(1.0, e, 1)

    # -- ordering ----------------------------------------------------------

    def _cmp(self, other: "ExtendedReal") -> int:
        if self.sign != other.sign:
            return 1 if self.sign > other.sign else -1
        if self.sign == 0:
            return 0
        if self.exponent != other.exponent:
            delta = 1 if self.exponent > other.exponent else -1
            return delta * self.sign
        if self.mantissa == other.mantissa:
            return 0
        return (1 if self.mantissa > other.mantissa else -1) * self.sign

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0


_ZERO = ExtendedReal(0.0, 0, 0)
_ONE = ExtendedReal(1.0, 0, 1)

_factorial_cache: dict[int, ExtendedReal] = {0: _ONE}


def xfactorial(n: int) -> ExtendedReal:
    """n! as an ExtendedReal; exact to double relative precision."""
    if n < 0:
        raise ValueError("factorial of a negative integer")
    if n in _factorial_cache:
        return _factorial_cache[n]
    top = max(_factorial_cache)
    acc = _factorial_cache[top]
    for k in range(top + 1, n + 1):
        acc = acc * ExtendedReal.from_float(float(k))
        _factorial_cache[k] = acc
    return acc
