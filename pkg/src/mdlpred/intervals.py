"""Nested dyadic localization of the true parameter, and what it implies.

`build_construction` produces the halving scheme around theta0: J_0 =
[0,1); at step k the previous core J_{k-1} (width d_k = 2^{-k+1}) is
split into a new core J_k containing theta0 and a complement I_k, both
of measure exactly 2^-k.  Which third of J_{k-1} holds theta0 decides
the step type:

  l-step: theta0 in [l, l + 3/8 d)        -> J_k left half,  I_k right half
  c-step: theta0 in [l + 3/8 d, l + 5/8 d) -> J_k middle half, I_k outer quarters
  r-step: theta0 in [l + 5/8 d, r)         -> J_k right half, I_k left half

All endpoints stay finite binary fractions, so membership tests are done
on exact rationals.  From the construction we derive per-step complexity
gaps (cheapest parameter inside I_k versus inside J_k), the gap-series
bound, and the neighborhood complexity condition with constants (a, b).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dyadic import Dyadic
from .model import ParamClass

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class IntervalStep:
    k: int
    step_type: str  # 'l', 'c' or 'r'
    j: tuple[Fraction, Fraction]
    i_parts: tuple[tuple[Fraction, Fraction], ...]

    @property
    def d(self) -> Fraction:
        """Width of the parent core J_{k-1}."""
        return Fraction(1, 1 << (self.k - 1))

    def i_measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.i_parts), Fraction(0))

    def j_measure(self) -> Fraction:
        return self.j[1] - self.j[0]

    def i_contains(self, x: Fraction) -> bool:
        return any(lo <= x < hi for lo, hi in self.i_parts)

    def j_contains(self, x: Fraction) -> bool:
        return self.j[0] <= x < self.j[1]

    def i_sup_distance(self, x: Fraction) -> Fraction:
        """sup |t - x| over the closure of I_k."""
        return max(max(abs(lo - x), abs(hi - x)) for lo, hi in self.i_parts)


def build_construction(theta0: Dyadic | Fraction, k_max: int) -> list[IntervalStep]:
    """Steps 1..k_max of the halving scheme around theta0 in (0,1)."""
    t0 = theta0.as_fraction() if isinstance(theta0, Dyadic) else Fraction(theta0)
    if not 0 < t0 < 1:
        raise ValueError(f"construction undefined at boundary parameter {t0}")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    steps: list[IntervalStep] = []
    lo, hi = Fraction(0), Fraction(1)
    for k in range(1, k_max + 1):
        d = hi - lo
        if d != Fraction(1, 1 << (k - 1)):
            raise AssertionError("core width drifted; construction bug")
        if t0 < lo + d * Fraction(3, 8):
            step = IntervalStep(k, "l", (lo, lo + d / 2), ((lo + d / 2, hi),))
        elif t0 < lo + d * Fraction(5, 8):
            step = IntervalStep(
                k,
                "c",
                (lo + d / 4, lo + d * Fraction(3, 4)),
                ((lo, lo + d / 4), (lo + d * Fraction(3, 4), hi)),
            )
        else:
            step = IntervalStep(k, "r", (lo + d / 2, hi), ((lo, lo + d / 2),))
        if not step.j_contains(t0):
            raise AssertionError("true parameter escaped the core; construction bug")
        steps.append(step)
        lo, hi = step.j
    return steps


# -- partitions of [0, 1] for contribution accounting -------------------------


@dataclass(frozen=True)
class Partition:
    """Ordered cells of half-open intervals covering [0, 1].

    A cell is a union of [lo, hi) parts; `hi = None` closes the last part
    at 1 inclusively.  Values not covered by any cell fall into the
    catch-all bin with index len(labels).
    """

    labels: tuple[str, ...]
    cells: tuple[tuple[tuple[Fraction, Fraction | None], ...], ...]

    @property
    def n_bins(self) -> int:
        return len(self.labels) + 1  # + catch-all

    def index_of(self, x: Fraction) -> int:
        for idx, parts in enumerate(self.cells):
            for lo, hi in parts:
                if hi is None:
                    if lo <= x <= 1:
                        return idx
                elif lo <= x < hi:
                    return idx
        return len(self.labels)

    def cut_arrays(self) -> "CutArrays":
        """Sorted distinct endpoints with the cell of each gap.

        The cuts come back both as exact integer pairs (for bit-exact
        membership of grid fractions k/n) and as floats (all endpoints
        are small dyadics, hence float-exact).  gap_cell[i] is the cell
        of [cuts[i], cuts[i+1]); cells are left-closed so that is the
        cell containing cuts[i].
        """
        pts = {Fraction(0), Fraction(1)}
        for parts in self.cells:
            for lo, hi in parts:
                pts.add(lo)
                pts.add(Fraction(1) if hi is None else hi)
        cuts = sorted(pts)
        if any(c.denominator > (1 << 40) for c in cuts):
            raise ValueError("partition endpoints finer than 2^-40 exceed the engine guard")
        gap_cell = [self.index_of(c) for c in cuts[:-1]]
        return CutArrays(
            np.array([c.numerator for c in cuts], dtype=np.int64),
            np.array([c.denominator for c in cuts], dtype=np.int64),
            np.array([float(c) for c in cuts]),
            np.array(gap_cell, dtype=np.int64),
            self.index_of(Fraction(1)),
        )


@dataclass(frozen=True)
class CutArrays:
    nums: np.ndarray
    dens: np.ndarray
    floats: np.ndarray
    gap_cell: np.ndarray
    at_one: int


def trivial_partition() -> Partition:
    """Single cell covering [0, 1]; used when no accounting is requested."""
    return Partition(("all",), (((Fraction(0), None),),))


def construction_partition(steps: Sequence[IntervalStep]) -> Partition:
    """Cells I_1..I_k plus the remaining core J_k (label 'core')."""
    labels = [f"I{s.k}" for s in steps] + ["core"]
    cells = [tuple((lo, hi) for lo, hi in s.i_parts) for s in steps]
    cells.append(((steps[-1].j[0], steps[-1].j[1]),))
    return Partition(tuple(labels), tuple(cells))


def prop4_partition(n_exp: int) -> Partition:
    """The 2**N disjoint intervals splitting [0,1] at 1/2 + 2^-k-1.

    Cell 0 is [0, theta_{2^N-1}); cell 1 is [theta_1, 1]; cell k for
    2 <= k <= 2^N-1 is [theta_k, theta_{k-1}).
    """
    if n_exp < 1:
        raise ValueError("N must be >= 1")
    m = (1 << n_exp) - 1
    theta = {k: HALF + Fraction(1, 1 << (k + 1)) for k in range(1, m + 1)}
    labels = [f"I{k}" for k in range(m + 1)]
    cells: list[tuple[tuple[Fraction, Fraction | None], ...]] = [((Fraction(0), theta[m]),)]
    cells.append(((theta[1], None),))
    for k in range(2, m + 1):
        cells.append(((theta[k], theta[k - 1]),))
    return Partition(tuple(labels), tuple(cells))


# -- complexity gaps over the construction ------------------------------------


@dataclass(frozen=True)
class DeltaRow:
    k: int
    i_index: int | None  # cheapest parameter inside I_k, None when empty
    j_index: int
    delta: float  # max(Kw_I - Kw_J, 0); inf when I_k holds no parameter


@dataclass(frozen=True)
class DeltaProfile:
    rows: tuple[DeltaRow, ...]
    true_index: int


def _cheapest(pc: ParamClass, member) -> int | None:
    best: int | None = None
    for idx, p in enumerate(pc.params):
        if member(p.exact_fraction()):
            if best is None:
                best = idx
                continue
            q = pc.params[best]
            if (p.kw, p.exact_fraction()) < (q.kw, q.exact_fraction()):
                best = idx
    return best


def delta_profile(pc: ParamClass, k_max: int) -> DeltaProfile:
    """Per-step complexity gaps for the class's own true parameter."""
    steps = build_construction(Fraction(pc.params[pc.true_index].exact_fraction()), k_max)
    rows = []
    for s in steps:
        i_idx = _cheapest(pc, s.i_contains)
        j_idx = _cheapest(pc, s.j_contains)
        if j_idx is None:
            raise AssertionError("core lost the true parameter")
        if i_idx is None:
            delta = math.inf
        else:
            delta = max(pc.params[i_idx].kw - pc.params[j_idx].kw, 0.0)
        rows.append(DeltaRow(s.k, i_idx, j_idx, delta))
    return DeltaProfile(tuple(rows), pc.true_index)


def gap_series_bound(profile: DeltaProfile, kw0: float) -> tuple[float, float, tuple[int, ...]]:
    """kw0 + sum over k of 2^-delta * sqrt(delta), with 0 and inf mapping to 0.

    Returns (value, last_increment, ks_with_zero_delta).  The last
    increment makes convergence visible; zero-delta steps are flagged
    because the literal formula silences maximally competitive rivals.
    """
    total = kw0
    last = 0.0
    zero_ks = []
    for row in profile.rows:
        if row.delta == 0.0:
            zero_ks.append(row.k)
            last = 0.0
            continue
        if math.isinf(row.delta):
            last = 0.0
            continue
        last = 2.0 ** -row.delta * math.sqrt(row.delta)
        total += last
    return total, last, tuple(zero_ks)


# -- neighborhood complexity condition -----------------------------------------


@dataclass(frozen=True)
class Cond14Result:
    ok: bool
    a: float
    b: float
    k_start: int
    k_max: int
    witness: tuple[int, int] | None  # (k, parameter index) of first failure
    vacuous_ks: tuple[int, ...]  # ks with an empty punctured neighborhood


def condition14_check(pc: ParamClass, a: float, b: float, k_max: int) -> Cond14Result:
    """Check min{Kw : theta in [t0 - 2^-k, t0 + 2^-k], theta != t0} >= (k-b)/a
    for every k with a*Kw(t0) + b < k <= k_max.

    Membership is exact; ks whose punctured neighborhood is empty pass
    vacuously and are reported as such.
    """
    if a < 1 or b < 0:
        raise ValueError("need a >= 1 and b >= 0")
    t0 = pc.params[pc.true_index].exact_fraction()
    k_start = math.floor(a * pc.kw0 + b) + 1
    witness = None
    vacuous = []
    for k in range(k_start, k_max + 1):
        radius = Fraction(1, 1 << k)
        lo, hi = t0 - radius, t0 + radius
        best_kw = None
        best_idx = None
        for idx, p in enumerate(pc.params):
            if idx == pc.true_index:
                continue
            v = p.exact_fraction()
            if lo <= v <= hi and (best_kw is None or p.kw < best_kw):
                best_kw, best_idx = p.kw, idx
        if best_kw is None:
            vacuous.append(k)
            continue
        if best_kw < (k - b) / a:
            witness = (k, best_idx)
            break
    return Cond14Result(witness is None, a, b, k_start, k_max, witness, tuple(vacuous))


# -- constants for distorted classes --------------------------------------------


@dataclass(frozen=True)
class DistortionParams:
    order: int  # first derivative order not vanishing at t0
    deriv_bound: float  # c: min |phi^(order)| over the epsilon interval
    a: float
    b: float


def distortion_params(
    coeffs: Sequence[float], t0: float, eps: float, zero_tol: float = 1e-12
) -> DistortionParams:
    """Constants (a, b) of the neighborhood condition for a polynomial map.

    Finds the smallest order n whose derivative at t0 exceeds zero_tol
    (all lower orders vanishing within it) and a positive lower bound c
    on |phi^(n)| over [t0-eps, t0+eps] clipped to [0,1]; then a = n and
    b = lb(n!) - lb(c) + 1.  Injectivity is screened by requiring phi'
    to keep one sign on a dense grid; that is a reported check, not a
    proof.
    """
    phi = np.polynomial.Polynomial(list(coeffs))
    if not 0 < t0 < 1:
        raise ValueError("t0 must be interior")
    if eps <= 0:
        raise ValueError("eps must be positive")
    grid = np.linspace(0.0, 1.0, 2001)
    dvals = phi.deriv()(grid)
    # isolated zeros of the derivative are fine; both signs are not
    if (np.any(dvals > 0) and np.any(dvals < 0)) or np.all(dvals == 0):
        raise ValueError("polynomial is not injective on [0,1] (derivative changes sign)")
    lo, hi = max(0.0, t0 - eps), min(1.0, t0 + eps)
    deg = len(phi.coef) - 1
    p = phi
    for order in range(1, deg + 1):
        p = p.deriv()
        at_t0 = float(p(t0))
        if abs(at_t0) <= zero_tol:
            continue
        c = _poly_abs_min(p, lo, hi)
        if c <= 0:
            raise ValueError(
                f"derivative order {order} vanishes inside [{lo}, {hi}]; shrink eps"
            )
        b = math.log2(math.factorial(order)) - math.log2(c) + 1.0
        return DistortionParams(order, c, float(order), b)
    raise ValueError("no derivative order up to the degree separates t0")


def _poly_abs_min(p: np.polynomial.Polynomial, lo: float, hi: float) -> float:
    """min |p| over [lo, hi]: zero if p has a real root there, else the
    minimum over the endpoints and interior critical points."""
    roots = p.roots()
    real = roots[np.abs(roots.imag) < 1e-12].real
    if np.any((real >= lo - 1e-15) & (real <= hi + 1e-15)):
        return 0.0
    cands = [lo, hi]
    if len(p.coef) > 2:
        crit = p.deriv().roots()
        crit = crit[np.abs(crit.imag) < 1e-12].real
        cands.extend(c for c in crit if lo <= c <= hi)
    return float(min(abs(float(p(c))) for c in cands))
