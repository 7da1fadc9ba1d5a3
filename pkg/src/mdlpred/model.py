"""Parameter classes and the three predictors (MDL, Bayes mixture, ML).

The MDL estimate at observation (n, ones) is the class element minimizing
the penalized divergence n*D(alpha||theta) + Kw(theta)*ln(2), alpha =
ones/n.  Divergences are in nats and the single bits-to-nats conversion
lives here, in the selection rule.  Ties are broken deterministically:
smallest Kw first, then smallest parameter value.

Scores of distinct parameters can get genuinely close (symmetric dyadic
classes produce near-ties), so any candidates within 1e-12 relative of
the float minimum are re-scored at 60 significant digits before the
tie-break is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .dyadic import Dyadic
from .info import kl_nats

LN2 = math.log(2.0)

NEAR_TIE_REL = 1e-12
# refined score gap below which two parameters are declared exactly tied
REFINED_TIE_ABS = 1e-30
_REFINE_DPS = 60


@dataclass(frozen=True)
class Param:
    """One class element: float value, complexity in bits, optional exact form."""

    value: float
    kw: float
    exact: Dyadic | None = None

    def exact_fraction(self) -> Fraction:
        """Exact rational value (floats are dyadic, so this never rounds)."""
        return self.exact.as_fraction() if self.exact is not None else Fraction(self.value)


@dataclass(frozen=True)
class ParamClass:
    """Finite ordered Bernoulli class with a designated true parameter."""

    params: tuple[Param, ...]
    true_index: int
    name: str = ""

    def __post_init__(self) -> None:
        if not self.params:
            raise ValueError("parameter class is empty")
        if not 0 <= self.true_index < len(self.params):
            raise ValueError(f"true_index {self.true_index} out of range")
        prev: Fraction | None = None
        for p in self.params:
            if not 0.0 <= p.value <= 1.0:
                raise ValueError(f"parameter {p.value} outside [0,1]")
            if p.kw < 0:
                raise ValueError(f"Kw({p.value}) = {p.kw} < 0")
            cur = p.exact_fraction()
            if prev is not None and cur <= prev:
                raise ValueError(f"values not strictly increasing at {p.value}")
            prev = cur

    def __len__(self) -> int:
        return len(self.params)

    @property
    def theta0(self) -> float:
        return self.params[self.true_index].value

    @property
    def kw0(self) -> float:
        return self.params[self.true_index].kw

    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.params])

    def kws(self) -> np.ndarray:
        return np.array([p.kw for p in self.params])

    def floats_distinct(self) -> bool:
        """True when the float projections are still strictly increasing.

        Exactly-stored values closer than an ulp collapse in float64; the
        float-based engine refuses such classes rather than silently
        merging parameters.
        """
        v = self.values()
        return bool(np.all(np.diff(v) > 0))

    def all_integer_kw(self) -> bool:
        return all(p.kw == int(p.kw) for p in self.params)

    def all_exact(self) -> bool:
        return all(p.exact is not None for p in self.params)


@dataclass(frozen=True)
class SufficientStat:
    """Everything the predictors may see: length n and count of ones."""

    n: int
    ones: int

    def __post_init__(self) -> None:
        if self.n < 0 or not 0 <= self.ones <= max(self.n, 0):
            raise ValueError(f"invalid statistic n={self.n}, ones={self.ones}")

    @property
    def alpha(self) -> float:
        if self.n == 0:
            raise ValueError("alpha undefined at n = 0")
        return self.ones / self.n


# -- penalized scores ----------------------------------------------------------


def penalized_score(pc: ParamClass, index: int, stat: SufficientStat, use_kw: bool = True) -> float:
    p = pc.params[index]
    pen = p.kw * LN2 if use_kw else 0.0
    if stat.n == 0:
        return pen
    return stat.n * kl_nats(stat.alpha, p.value) + pen


def _score_refined(pc: ParamClass, index: int, stat: SufficientStat, use_kw: bool) -> mpmath.mpf:
    """Penalized score at 60 significant digits (exact inputs where stored)."""
    p = pc.params[index]
    with mpmath.workdps(_REFINE_DPS):
        if p.exact is not None:
            th = mpmath.mpf(p.exact.mantissa) / mpmath.power(2, p.exact.exponent)
        else:
            th = mpmath.mpf(p.value)
        pen = mpmath.mpf(p.kw) * mpmath.log(2) if use_kw else mpmath.mpf(0)
        if stat.n == 0:
            return pen
        a = mpmath.mpf(stat.ones) / stat.n
        if th == 0 or th == 1:
            matches = (a == 0 and th == 0) or (a == 1 and th == 1)
            return pen if matches else mpmath.inf
        t1 = a * mpmath.log(a / th) if stat.ones > 0 else mpmath.mpf(0)
        t2 = (1 - a) * mpmath.log((1 - a) / (1 - th)) if stat.ones < stat.n else mpmath.mpf(0)
        return stat.n * (t1 + t2) + pen


def _tie_key(pc: ParamClass, index: int, use_kw: bool) -> tuple:
    p = pc.params[index]
    kw = p.kw if use_kw else 0.0
    return (kw, p.exact_fraction())


def _select(pc: ParamClass, stat: SufficientStat, use_kw: bool) -> int:
    if stat.n == 0:
        return min(range(len(pc)), key=lambda i: _tie_key(pc, i, use_kw))
    scores = [penalized_score(pc, i, stat, use_kw) for i in range(len(pc))]
    best = min(scores)
    if math.isinf(best):
        # every divergence infinite cannot happen: some theta is in (0,1)
        # or alpha hits an endpoint parameter exactly
        finite = [i for i, s in enumerate(scores) if not math.isinf(s)]
        if not finite:
            raise ArithmeticError("all penalized scores infinite")
    tol = NEAR_TIE_REL * max(1.0, abs(best))
    cands = [i for i, s in enumerate(scores) if s - best <= tol]
    if len(cands) > 1:
        refined = {i: _score_refined(pc, i, stat, use_kw) for i in cands}
        rbest = min(refined.values())
        cands = [i for i in cands if refined[i] - rbest <= REFINED_TIE_ABS * max(1, abs(rbest))]
    return min(cands, key=lambda i: _tie_key(pc, i, use_kw))


def mdl_select(pc: ParamClass, stat: SufficientStat) -> int:
    """Index minimizing n*D(alpha||theta) + Kw*ln2; ties by (Kw, value).

    At n = 0 the penalty term is all that remains, so the minimum-Kw
    element is returned.
    """
    return _select(pc, stat, use_kw=True)


def ml_select(pc: ParamClass, stat: SufficientStat) -> int:
    """MDL selection with all complexities treated as zero."""
    return _select(pc, stat, use_kw=False)


def beats(pc: ParamClass, i: int, j: int, stat: SufficientStat) -> bool:
    """True when element i is weakly preferred to element j at (alpha, n).

    Defined through the penalized scores (score_i <= score_j), which is
    the rearranged form of n*(D_j - D_i) >= ln2*(Kw_i - Kw_j) and stays
    meaningful when both divergences are infinite.
    """
    if i == j:
        raise ValueError("beats needs two distinct indices")
    si = penalized_score(pc, i, stat)
    sj = penalized_score(pc, j, stat)
    if math.isinf(si) and math.isinf(sj):
        return True
    gap = abs(si - sj)
    if gap <= NEAR_TIE_REL * max(1.0, abs(si), abs(sj)):
        ri = _score_refined(pc, i, stat, use_kw=True)
        rj = _score_refined(pc, j, stat, use_kw=True)
        if abs(ri - rj) <= REFINED_TIE_ABS * max(1, abs(ri)):
            return True
        return bool(ri < rj)
    return si <= sj


def bayes_predict(pc: ParamClass, stat: SufficientStat) -> float:
    """Posterior-mean probability of the next bit being 1.

    sum(w * lik * theta) / sum(w * lik), evaluated after a max-shift in
    the log domain; the result always lies in [min theta, max theta].
    """
    n, k = stat.n, stat.ones
    logs = np.empty(len(pc))
    vals = np.empty(len(pc))
    for idx, p in enumerate(pc.params):
        vals[idx] = p.value
        if p.value == 0.0:
            ll = 0.0 if k == 0 else -math.inf
        elif p.value == 1.0:
            ll = 0.0 if k == n else -math.inf
        else:
            ll = k * math.log(p.value) + (n - k) * math.log1p(-p.value)
        logs[idx] = ll - p.kw * LN2
    m = logs.max()
    if m == -math.inf:
        raise ArithmeticError("all posterior weights vanished")
    w = np.exp(logs - m)
    den = w.sum()
    num = float(w @ vals)
    return num / float(den)
