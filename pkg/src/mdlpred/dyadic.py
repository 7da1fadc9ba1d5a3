"""Exact finite binary fractions on [0, 1].

A Dyadic is a value m / 2**e held as integers, so parameter comparisons,
interval membership tests and tie-breaks are bit-exact no matter how close
two values are.  Canonical form keeps one representation per value:
the mantissa is odd unless the value is exactly 0 or 1 (both stored with
exponent 0).

The bit length of 0.b1...bn with bn = 1 is n; the endpoints 0 and 1 have
bit length 0 by convention (they are coded separately, see `coding`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


@dataclass(frozen=True)
class Dyadic:
    """m / 2**e with 0 <= value <= 1, canonical (m odd, or value in {0, 1})."""

    mantissa: int
    exponent: int

    def __post_init__(self) -> None:
        m, e = self.mantissa, self.exponent
        if m < 0 or e < 0:
            raise ValueError(f"negative mantissa/exponent: {m}/2^{e}")
        if m > (1 << e):
            raise ValueError(f"value {m}/2^{e} exceeds 1")
        if m in (0, 1 << e):
            if e != 0:
                raise ValueError(f"0 and 1 must be stored with exponent 0, got {m}/2^{e}")
        elif m % 2 == 0:
            raise ValueError(f"non-canonical dyadic {m}/2^{e}: even mantissa")

    # -- constructors ----------------------------------------------------

    @staticmethod
    def zero() -> "Dyadic":
        return Dyadic(0, 0)

    @staticmethod
    def one() -> "Dyadic":
        return Dyadic(1, 0)

    @staticmethod
    def make(mantissa: int, exponent: int) -> "Dyadic":
        """Canonicalize m / 2**e (reduces even mantissas)."""
        if exponent < 0 or mantissa < 0:
            raise ValueError(f"negative mantissa/exponent: {mantissa}/2^{exponent}")
        while exponent > 0 and mantissa % 2 == 0:
            mantissa //= 2
            exponent -= 1
        return Dyadic(mantissa, exponent)

    @staticmethod
    def from_fraction(q: Fraction) -> "Dyadic":
        num, den = q.numerator, q.denominator
        e = den.bit_length() - 1
        if den != (1 << e):
            raise ValueError(f"{q} is not a dyadic rational")
        return Dyadic.make(num, e)

    # -- views ------------------------------------------------------------

    @property
    def value(self) -> float:
        """Nearest float; exact whenever exponent <= 52 or value in {0, 1}."""
        return self.mantissa / (1 << self.exponent)

    def as_fraction(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.exponent)

    def is_float_exact(self) -> bool:
        """True when `value` round-trips (float64 holds this dyadic exactly)."""
        if self.mantissa == 0:
            return True
        return self.mantissa.bit_length() <= 53 and self.exponent <= 1022

    def bits(self) -> tuple[int, ...]:
        """Binary digits b1..bn of 0.b1...bn; empty for 0 and 1."""
        if self.exponent == 0:
            return ()
        return tuple((self.mantissa >> (self.exponent - 1 - i)) & 1 for i in range(self.exponent))

    def __str__(self) -> str:
        if self.mantissa == 0:
            return "0"
        if self.exponent == 0:
            return "1"
        return "0." + "".join(str(b) for b in self.bits())

    # -- exact order -------------------------------------------------------

    def _cmp(self, other: "Dyadic") -> int:
        lhs = self.mantissa << other.exponent
        rhs = other.mantissa << self.exponent
        return (lhs > rhs) - (lhs < rhs)

    def __lt__(self, other: "Dyadic") -> bool:
        return self._cmp(other) < 0

    def __le__(self, other: "Dyadic") -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other: "Dyadic") -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other: "Dyadic") -> bool:
        return self._cmp(other) >= 0


def from_bits(bits: Sequence[int] | Iterable[int]) -> Dyadic:
    """Build the dyadic 0.b1...bn from its digit sequence.

    The empty sequence maps to 0.  A trailing 0 digit is rejected: the
    canonical digit string of a fraction in (0, 1) always ends in 1, and
    accepting padded strings would make bit lengths ambiguous.
    """
    seq = tuple(bits)
    if not seq:
        return Dyadic.zero()
    if any(b not in (0, 1) for b in seq):
        raise ValueError(f"digits must be 0/1, got {seq!r}")
    if seq[-1] != 1:
        raise ValueError(f"non-canonical digit string {seq!r}: trailing zero")
    m = 0
    for b in seq:
        m = (m << 1) | b
    return Dyadic(m, len(seq))


def length(theta: Dyadic) -> int:
    """Bit length of the binary expansion; 0 for the endpoints 0 and 1."""
    return 0 if theta.exponent == 0 else theta.exponent


def parse_dyadic(text: str) -> Dyadic:
    """Parse the textual forms used in config files.

    Accepted: "0", "1", a binary expansion "0.0011", or a rational "p/q"
    with q a power of two (also written "p/2^q").
    """
    s = text.strip()
    if s == "0":
        return Dyadic.zero()
    if s == "1":
        return Dyadic.one()
    if s.startswith("0.") and len(s) > 2 and set(s[2:]) <= {"0", "1"}:
        digits = s[2:].rstrip("0")  # trailing zeros do not change the value
        return from_bits(tuple(int(c) for c in digits)) if digits else Dyadic.zero()
    if "/" in s:
        num_s, den_s = s.split("/", 1)
        num = int(num_s)
        if "^" in den_s:
            base_s, exp_s = den_s.split("^", 1)
            if int(base_s) != 2:
                raise ValueError(f"denominator base must be 2 in {text!r}")
            den = 1 << int(exp_s)
        else:
            den = int(den_s)
        return Dyadic.from_fraction(Fraction(num, den))
    raise ValueError(f"cannot parse dyadic literal {text!r}")
