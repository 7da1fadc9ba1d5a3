"""Exact-rational brute-force expectation, independent of the fast engine.

The oracle enumerates every count k at a given n, weighs it by the exact
binomial probability (big-integer rationals; requires exactly stored
dyadic parameters), and squares the exact prediction error.  Bayes
predictions are themselves exact rationals when complexities are
integers (weights 2^-Kw).  MDL/ML selections involve logarithms, so they
cannot be decided in rational arithmetic; they are re-derived here by an
independent scan of penalized scores at 80 significant digits, declaring
a tie below 1e-40 relative and falling back to the (Kw, value) order.
That margin is astronomically wider than the double-precision noise the
fast engine has to survive, which is what makes this a usable referee.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath

from .model import ParamClass

_ORACLE_DPS = 80
_ORACLE_TIE = mpmath.mpf("1e-40")
_MAX_N = 32


def _require_oracle_ready(pc: ParamClass, predictor: str) -> None:
    if not pc.all_exact():
        raise ValueError("oracle needs exactly stored dyadic parameters")
    if predictor == "bayes" and not pc.all_integer_kw():
        raise ValueError("exact Bayes oracle needs integer complexities")


def oracle_select(pc: ParamClass, n: int, k: int, use_kw: bool) -> int:
    """argmin of n*D(k/n || theta) + Kw*ln2 at 80 digits; ties by (Kw, value)."""
    with mpmath.workdps(_ORACLE_DPS):
        a = mpmath.mpf(k) / n
        scores: list = []
        for p in pc.params:
            th = mpmath.mpf(p.exact.mantissa) / mpmath.power(2, p.exact.exponent)
            pen = mpmath.mpf(p.kw) * mpmath.log(2) if use_kw else mpmath.mpf(0)
            if th == 0 or th == 1:
                hit = (k == 0 and th == 0) or (k == n and th == 1)
                scores.append(pen if hit else mpmath.inf)
                continue
            t1 = a * mpmath.log(a / th) if k > 0 else mpmath.mpf(0)
            t2 = (1 - a) * mpmath.log((1 - a) / (1 - th)) if k < n else mpmath.mpf(0)
            scores.append(n * (t1 + t2) + pen)
        best = min(scores)
        tol = _ORACLE_TIE * max(1, abs(best))
        cands = [i for i, s in enumerate(scores) if s - best <= tol]
    kw_of = (lambda i: pc.params[i].kw) if use_kw else (lambda i: 0.0)
    return min(cands, key=lambda i: (kw_of(i), pc.params[i].exact_fraction()))


def oracle_bayes(pc: ParamClass, n: int, k: int) -> Fraction:
    """Exact posterior-mean next-bit probability."""
    num = Fraction(0)
    den = Fraction(0)
    for p in pc.params:
        th = p.exact_fraction()
        w = Fraction(1, 1 << int(p.kw))
        lik = th**k * (1 - th) ** (n - k)
        den += w * lik
        num += w * lik * th
    if den == 0:
        raise ArithmeticError("posterior mass is exactly zero")
    return num / den


def oracle_expected_loss(pc: ParamClass, predictor: str, n: int) -> Fraction:
    """Exact E(pred - theta0)^2 at sequence length n, full expectation."""
    if n < 1 or n > _MAX_N:
        raise ValueError(f"oracle supports 1 <= n <= {_MAX_N}")
    _require_oracle_ready(pc, predictor)
    t0 = pc.params[pc.true_index].exact_fraction()
    total = Fraction(0)
    for k in range(n + 1):
        pmf = Fraction(math.comb(n, k)) * t0**k * (1 - t0) ** (n - k)
        if pmf == 0:
            continue
        if predictor == "bayes":
            pred = oracle_bayes(pc, n, k)
        elif predictor in ("mdl", "ml"):
            idx = oracle_select(pc, n, k, use_kw=predictor == "mdl")
            pred = pc.params[idx].exact_fraction()
        else:
            raise ValueError(f"unknown predictor {predictor!r}")
        total += pmf * (pred - t0) ** 2
    return total
