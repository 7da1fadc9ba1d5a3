"""Complexity assignments Kw on parameter sets.

Kw(theta) is a description length in bits and induces the weight
w = 2**-Kw.  Assignments need not satisfy the Kraft inequality; when one
is declared sub-Kraft we verify sum(2**-Kw) <= 1 with an upward-rounded
accumulation, so a PASS is a certified statement about the real sum and
not about float round-off.

`kw_example` is the built-in prefix-code length on finite binary
fractions: the endpoints cost 2 bits, and a fraction of bit length L
costs L + 2*floor(lb(L+1)) bits (length header coded with doubled bits,
then the L-1 free digits).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .dyadic import Dyadic, length

_MAX_ENUM_LEN = 24  # 2**24 + 1 parameters is already past any sane class size


def kw_example(theta: Dyadic) -> float:
    """Code length (bits) of the built-in prefix code on binary fractions."""
    ell = length(theta)
    if ell == 0:
        return 2.0
    return float(ell + 2 * ((ell + 1).bit_length() - 1))


def enumerate_qbstar(max_len: int) -> list[Dyadic]:
    """All binary fractions of bit length <= max_len, plus 0 and 1, ascending.

    The count is 2 + 2**max_len - 1: each length L contributes the
    2**(L-1) fractions whose expansion ends in 1.
    """
    if max_len < 0:
        raise ValueError("max_len must be >= 0")
    if max_len > _MAX_ENUM_LEN:
        raise ValueError(
            f"max_len={max_len} would enumerate {2 ** max_len + 1} parameters; "
            f"the guard is {_MAX_ENUM_LEN}"
        )
    out = [Dyadic.zero()]
    out.extend(Dyadic(m, e) for e in range(1, max_len + 1) for m in range(1, 1 << e, 2))
    out.append(Dyadic.one())
    out.sort(key=lambda d: d.as_fraction())
    return out


@dataclass(frozen=True)
class ComplexityAssignment:
    """Finite table theta -> Kw(theta) >= 0 (bits).

    `sub_kraft` declares the intent that sum(2**-Kw) <= 1; it is checked
    at construction via `kraft_sum`.  Missing parameters are an error at
    lookup time, never a default.
    """

    entries: tuple[tuple[Dyadic, float], ...]
    sub_kraft: bool = False
    name: str = ""
    _index: Mapping[tuple[int, int], float] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        idx: dict[tuple[int, int], float] = {}
        for theta, kw in self.entries:
            if kw < 0:
                raise ValueError(f"Kw({theta}) = {kw} < 0")
            key = (theta.mantissa, theta.exponent)
            if key in idx:
                raise ValueError(f"duplicate parameter {theta}")
            idx[key] = float(kw)
        object.__setattr__(self, "_index", idx)
        if self.sub_kraft:
            s = kraft_sum(self)
            if s > 1.0:
                raise ValueError(f"assignment declared sub-Kraft but kraft_sum = {s}")

    def kw(self, theta: Dyadic) -> float:
        key = (theta.mantissa, theta.exponent)
        if key not in self._index:
            raise KeyError(f"no complexity assigned to {theta}")
        return self._index[key]

    def weight(self, theta: Dyadic) -> float:
        return 2.0 ** -self.kw(theta)


def example_coding(max_len: int) -> ComplexityAssignment:
    """`kw_example` over the full enumeration up to max_len."""
    thetas = enumerate_qbstar(max_len)
    return ComplexityAssignment(
        tuple((t, kw_example(t)) for t in thetas),
        sub_kraft=True,
        name=f"example-coding:{max_len}",
    )


def uniform_coding(thetas: Sequence[Dyadic], kw: float) -> ComplexityAssignment:
    return ComplexityAssignment(tuple((t, float(kw)) for t in thetas), name=f"uniform:{kw}")


# -- upward-rounded summation ---------------------------------------------


def _add_rounded_up(s: float, x: float) -> float:
    """s + x rounded toward +inf (two-sum detects a downward rounding)."""
    t = s + x
    b = t - s
    err = (s - (t - b)) + (x - b)
    if err > 0.0:
        t = math.nextafter(t, math.inf)
    return t


def _pow2_rounded_up(kw: float) -> float:
    """Upper bound on 2**-kw; exact for integer kw in float range."""
    if kw == int(kw) and 0 <= kw <= 1074:
        return math.ldexp(1.0, -int(kw))
    return math.nextafter(2.0 ** -kw, math.inf)


def kraft_sum(assignment: ComplexityAssignment) -> float:
    """sum(2**-Kw) accumulated with upward rounding.

    The result is >= the exact sum, so `kraft_sum(a) <= 1` certifies the
    Kraft inequality for the assignment.
    """
    s = 0.0
    for _, kw in assignment.entries:
        s = _add_rounded_up(s, _pow2_rounded_up(kw))
    return s
