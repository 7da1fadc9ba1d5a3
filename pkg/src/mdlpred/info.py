"""Information-theoretic primitives and certified inequality suites.

Everything here is in nats unless a name says bits.  The divergence
kl(a, t) = a*ln(a/t) + (1-a)*ln((1-a)/(1-t)) uses the extended-real
boundary conventions 0*ln(0) = 0, 0/0 = 1 and x*ln(x/0) = +inf, so no
argument combination raises.

The check_* suites evaluate inequality statements over grids and return
an InequalityReport.  A violation is a signed relative slack below
-1e-12: the statements are exact mathematics, the tolerance only absorbs
float rounding.  Slack is (rhs - lhs) / max(1, |lhs|, |rhs|) for a
statement lhs <= rhs, and the worst slack is recorded even on passing
suites so the margin is visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

SLACK_TOL = -1e-12


# -- Kullback-Leibler divergence -------------------------------------------


@dataclass(frozen=True)
class KlValue:
    """Divergence in nats, with a flag when a boundary convention fired."""

    value: float
    boundary: bool = False

    def __float__(self) -> float:
        return self.value


def kl_nats(alpha: float, theta: float) -> float:
    """Fast scalar divergence; see `kl` for the convention-tracking form."""
    if not (0.0 <= alpha <= 1.0 and 0.0 <= theta <= 1.0):
        raise ValueError(f"arguments must lie in [0,1], got ({alpha}, {theta})")
    if alpha == 0.0:
        return 0.0 if theta == 0.0 else (math.inf if theta == 1.0 else -math.log1p(-theta))
    if alpha == 1.0:
        return 0.0 if theta == 1.0 else (math.inf if theta == 0.0 else -math.log(theta))
    if theta == 0.0 or theta == 1.0:
        return math.inf
    d = theta - alpha
    # per-term: log1p form while the ratio stays in [1/2, inf) (no
    # cancellation near equality), difference of logs once it leaves
    # (log1p loses ~alpha/theta ulps as theta/alpha -> 0)
    if theta >= 0.5 * alpha:
        t1 = -alpha * math.log1p(d / alpha)
    else:
        t1 = alpha * (math.log(alpha) - math.log(theta))
    if 1.0 - theta >= 0.5 * (1.0 - alpha):
        t2 = -(1.0 - alpha) * math.log1p(-d / (1.0 - alpha))
    else:
        t2 = (1.0 - alpha) * (math.log1p(-alpha) - math.log1p(-theta))
    return t1 + t2


def kl(alpha: float, theta: float) -> KlValue:
    value = kl_nats(alpha, theta)
    at_boundary = alpha in (0.0, 1.0) or theta in (0.0, 1.0)
    return KlValue(value, at_boundary)


def kl_nats_vec(alpha: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Vectorized divergence on interior arguments (0 < alpha, theta < 1)."""
    alpha = np.asarray(alpha, dtype=float)
    theta = np.asarray(theta, dtype=float)
    d = theta - alpha
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(
            theta >= 0.5 * alpha,
            -alpha * np.log1p(d / alpha),
            alpha * (np.log(alpha) - np.log(theta)),
        )
        t2 = np.where(
            1.0 - theta >= 0.5 * (1.0 - alpha),
            -(1.0 - alpha) * np.log1p(-d / (1.0 - alpha)),
            (1.0 - alpha) * (np.log1p(-alpha) - np.log1p(-theta)),
        )
    return t1 + t2


# -- binomial pmf ------------------------------------------------------------


def binom_pmf(n: int, k: int, theta0: float) -> float:
    """C(n,k) * theta0^k * (1-theta0)^(n-k) via log-gamma.

    Point masses at theta0 in {0, 1} are returned exactly.
    """
    if n < 1 or not 0 <= k <= n:
        raise ValueError(f"need n >= 1 and 0 <= k <= n, got n={n}, k={k}")
    if theta0 == 0.0:
        return 1.0 if k == 0 else 0.0
    if theta0 == 1.0:
        return 1.0 if k == n else 0.0
    log_p = (
        math.lgamma(n + 1)
        - math.lgamma(k + 1)
        - math.lgamma(n - k + 1)
        + k * math.log(theta0)
        + (n - k) * math.log1p(-theta0)
    )
    return math.exp(log_p)


def binom_pmf_window(n: int, k_lo: int, k_hi: int, theta0: float) -> np.ndarray:
    """pmf over k_lo..k_hi by the ratio recurrence, seeded in log domain.

    The seed is the near-center k, so the outward cumulative products only
    ever multiply ratios that shrink the value; far tails underflow to 0,
    which is exact at double precision.
    """
    if not 0 <= k_lo <= k_hi <= n:
        raise ValueError(f"bad window [{k_lo}, {k_hi}] for n={n}")
    ks = np.arange(k_lo, k_hi + 1)
    if theta0 == 0.0 or theta0 == 1.0:
        out = np.zeros(len(ks))
        point = 0 if theta0 == 0.0 else n
        if k_lo <= point <= k_hi:
            out[point - k_lo] = 1.0
        return out
    k0 = min(max(int(round(n * theta0)), k_lo), k_hi)
    log_p0 = (
        math.lgamma(n + 1)
        - math.lgamma(k0 + 1)
        - math.lgamma(n - k0 + 1)
        + k0 * math.log(theta0)
        + (n - k0) * math.log1p(-theta0)
    )
    out = np.empty(len(ks))
    i0 = k0 - k_lo
    out[i0] = math.exp(log_p0)
    r = theta0 / (1.0 - theta0)
    # p(k+1)/p(k) = (n-k)/(k+1) * r
    if k0 < k_hi:
        up = (n - ks[i0:-1]) / (ks[i0:-1] + 1.0) * r
        out[i0 + 1 :] = out[i0] * np.cumprod(up)
    if k0 > k_lo:
        down = (ks[1 : i0 + 1]) / (n - ks[1 : i0 + 1] + 1.0) / r
        out[:i0] = out[i0] * np.cumprod(down[::-1])[::-1]
    return out


# -- inequality reports ------------------------------------------------------


@dataclass(frozen=True)
class StatementCheck:
    statement: str
    checked: int
    violations: int
    worst_slack: float
    witness: tuple | None = None

    @property
    def ok(self) -> bool:
        return self.violations == 0


@dataclass(frozen=True)
class InequalityReport:
    lemma: str
    grid: str
    statements: tuple[StatementCheck, ...]

    @property
    def violations(self) -> int:
        return sum(s.violations for s in self.statements)

    @property
    def worst_slack(self) -> float:
        return min(s.worst_slack for s in self.statements)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def csv_rows(self) -> list[tuple]:
        return [
            (self.lemma, s.statement, s.checked, s.violations, repr(s.worst_slack))
            for s in self.statements
        ]

    @staticmethod
    def merge(parts: Sequence["InequalityReport"]) -> "InequalityReport":
        """Order-independent merge of partitioned sweeps of the same suite."""
        first = parts[0]
        by_stmt: dict[str, list[StatementCheck]] = {}
        for p in parts:
            if p.lemma != first.lemma:
                raise ValueError("cannot merge reports of different suites")
            for s in p.statements:
                by_stmt.setdefault(s.statement, []).append(s)
        merged = tuple(
            StatementCheck(
                name,
                sum(s.checked for s in group),
                sum(s.violations for s in group),
                min(s.worst_slack for s in group),
                next((s.witness for s in group if s.witness is not None), None),
            )
            for name, group in by_stmt.items()
        )
        return InequalityReport(first.lemma, "merged", merged)


def _check_pairs(
    statement: str,
    lhs: np.ndarray,
    rhs: np.ndarray,
    pairs: np.ndarray,
) -> StatementCheck:
    denom = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    slack = (rhs - lhs) / denom
    bad = slack < SLACK_TOL
    witness = None
    if bad.any():
        i = int(np.argmin(slack))
        witness = (float(pairs[i, 0]), float(pairs[i, 1]), float(slack[i]))
    return StatementCheck(statement, len(slack), int(bad.sum()), float(slack.min()), witness)


# -- quadratic divergence bounds (statements i..iv and mirrors) --------------

_FIXED_PAIRS = [
    (0.5, 0.25),
    (0.5, 0.5),
    (0.25, 0.75),
    (0.25, 0.25),
    (0.75, 0.75),
    (0.4, 0.6),
    (0.1, 0.2),
    (0.9, 0.8),
    (0.25, 0.75 / 3),
    (0.2, 0.6),
    (0.8, 0.4 / 3 + 0.6),
]


def _closer_to_half(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # ties pick the first argument: deterministic and symmetric in value
    return np.where(np.abs(b - 0.5) < np.abs(a - 0.5), b, a)


def check_lemma1(count: int = 10_000, seed: int = 20240715) -> InequalityReport:
    """Quadratic upper/lower bounds on the divergence, per-statement domains.

    i:   2(a-b)^2 <= D(a||b)                     on (0,1)^2
    ii:  D(a||b) <= (8/3)(a-b)^2                 on [1/4,3/4]^2
    iii: (a-b)^2 / (2 t*(1-t*)) <= D(a||b)       for a,b <= 1/2
    iv:  D(a||b) <= 3(a-b)^2 / (2 t*(1-t*))      for a <= 1/4, b in [a/3, 3a]
    iii_sym / iv_sym: mirror images under x -> 1-x for a,b >= 1/2.

    t* is the argument closer to 1/2 (ties pick the first).  Grid points
    outside a statement's domain are excluded from it, never passed.
    """
    rng = np.random.default_rng(seed)
    lo, hi = 1e-9, 1.0 - 1e-9

    def sample(n, a_lo, a_hi, b_lo, b_hi):
        a = rng.uniform(a_lo, a_hi, n)
        b = rng.uniform(b_lo, b_hi, n)
        return a, b

    fixed = np.array(_FIXED_PAIRS)

    def with_fixed(a, b, domain):
        mask = domain(fixed[:, 0], fixed[:, 1])
        a = np.concatenate([a, fixed[mask, 0]])
        b = np.concatenate([b, fixed[mask, 1]])
        return a, b

    checks = []

    # i
    a, b = sample(count, lo, hi, lo, hi)
    a, b = with_fixed(a, b, lambda x, y: (x > 0) & (x < 1) & (y > 0) & (y < 1))
    d = kl_nats_vec(a, b)
    checks.append(_check_pairs("i", 2.0 * (a - b) ** 2, d, np.column_stack([a, b])))

    # ii
    a, b = sample(count, 0.25, 0.75, 0.25, 0.75)
    a, b = with_fixed(a, b, lambda x, y: (x >= 0.25) & (x <= 0.75) & (y >= 0.25) & (y <= 0.75))
    d = kl_nats_vec(a, b)
    checks.append(_check_pairs("ii", d, (8.0 / 3.0) * (a - b) ** 2, np.column_stack([a, b])))

    # iii and its mirror
    for name, (alo_, ahi_) in (("iii", (lo, 0.5)), ("iii_sym", (0.5, hi))):
        a, b = sample(count, alo_, ahi_, alo_, ahi_)
        a, b = with_fixed(
            a, b, lambda x, y, l=alo_, h=ahi_: (x >= l) & (x <= h) & (y >= l) & (y <= h)
        )
        t = _closer_to_half(a, b)
        d = kl_nats_vec(a, b)
        checks.append(
            _check_pairs(name, (a - b) ** 2 / (2.0 * t * (1.0 - t)), d, np.column_stack([a, b]))
        )

    # iv: a <= 1/4 and b within a factor 3 of a
    a = rng.uniform(lo, 0.25, count)
    b = rng.uniform(a / 3.0, 3.0 * a)
    a, b = with_fixed(a, b, lambda x, y: (x <= 0.25) & (y >= x / 3) & (y <= 3 * x) & (y < 1))
    t = _closer_to_half(a, b)
    d = kl_nats_vec(a, b)
    checks.append(
        _check_pairs("iv", d, 3.0 * (a - b) ** 2 / (2.0 * t * (1.0 - t)), np.column_stack([a, b]))
    )

    # iv_sym: mirror-image domain, a >= 3/4 and 1-b within a factor 3 of 1-a
    a = rng.uniform(0.75, hi, count)
    b = 1.0 - rng.uniform((1.0 - a) / 3.0, 3.0 * (1.0 - a))
    a, b = with_fixed(
        a,
        b,
        lambda x, y: (x >= 0.75) & (1 - y >= (1 - x) / 3) & (1 - y <= 3 * (1 - x)) & (y > 0),
    )
    t = _closer_to_half(a, b)
    d = kl_nats_vec(a, b)
    checks.append(
        _check_pairs(
            "iv_sym", d, 3.0 * (a - b) ** 2 / (2.0 * t * (1.0 - t)), np.column_stack([a, b])
        )
    )

    return InequalityReport("lemma1", f"{count} random pairs/statement, seed={seed}", tuple(checks))


def check_lemma2(
    n_max: int = 2000, theta0_grid: Sequence[float] = tuple(np.arange(1, 10) / 10)
) -> InequalityReport:
    """Gaussian-style envelopes around the binomial pmf.

    upper: p(k/n | n) <= exp(-n D(k/n || t0)) / sqrt(2 pi a (1-a) n)
    lower: p(k/n | n) >= exp(-n D(k/n || t0)) / sqrt(8 a (1-a) n)

    for n >= 2, 1 <= k <= n-1.  Compared in the log domain, where both
    sides stay representable for every n <= n_max; slacks are therefore
    in log units, which matches the relative-slack convention.
    """
    ns = np.concatenate([np.full(n - 1, n, dtype=np.int64) for n in range(2, n_max + 1)])
    ks = np.concatenate([np.arange(1, n, dtype=np.int64) for n in range(2, n_max + 1)])
    nf = ns.astype(float)
    kf = ks.astype(float)
    alpha = kf / nf
    log_comb = gammaln(nf + 1.0) - gammaln(kf + 1.0) - gammaln(nf - kf + 1.0)
    log_alpha = np.log(alpha)
    log_1malpha = np.log1p(-alpha)
    half_log_a1an = 0.5 * (np.log(alpha) + np.log1p(-alpha) + np.log(nf))

    ups, los = [], []
    for t0 in theta0_grid:
        log_pmf = log_comb + kf * math.log(t0) + (nf - kf) * math.log1p(-t0)
        neg_nd = kf * (math.log(t0) - log_alpha) + (nf - kf) * (math.log1p(-t0) - log_1malpha)
        log_upper = -0.5 * math.log(2.0 * math.pi) - half_log_a1an + neg_nd
        log_lower = -0.5 * math.log(8.0) - half_log_a1an + neg_nd
        pairs = np.column_stack([nf, kf])
        ups.append(_check_pairs(f"upper@{t0:g}", log_pmf, log_upper, pairs))
        los.append(_check_pairs(f"lower@{t0:g}", log_lower, log_pmf, pairs))
    checks = ups + los
    grid = f"n<=2..{n_max} exhaustive k, theta0 in {list(np.round(theta0_grid, 3))}"
    return InequalityReport("lemma2", grid, tuple(checks))


_SERIES_TAIL_TOL = 1e-15
_SERIES_MAX_TERMS = 10**9


def _series_with_tail(z: float) -> tuple[float, float, float, float, int]:
    """(S1, tail1, S2, tail2, terms): partial sums of sqrt(n)*exp(-z^2 n)
    and exp(-z^2 n)/sqrt(n), each with a certified geometric tail bound.

    For the growing-term series the step ratio is bounded by
    sqrt(1 + 1/(n+1)) * exp(-z^2), which is what the tail bound uses; the
    decreasing series uses the plain ratio exp(-z^2).
    """
    if z <= 0:
        raise ValueError("z must be positive")
    q = math.exp(-z * z)
    est = int(60.0 / (z * z)) + 10
    if est > _SERIES_MAX_TERMS:
        zmin = math.sqrt(60.0 / _SERIES_MAX_TERMS)
        raise ValueError(
            f"z={z} needs ~{est} terms (> {_SERIES_MAX_TERMS}); feasible z >= {zmin:.2e}"
        )
    def add(state: list[float], val: float) -> None:
        s, c = state
        t = s + val
        c += (s - t) + val if abs(s) >= abs(val) else (val - t) + s
        state[0], state[1] = t, c

    acc1 = [0.0, 0.0]
    acc2 = [0.0, 0.0]
    n = 0
    while True:
        n += 1
        if n > _SERIES_MAX_TERMS:
            raise RuntimeError("series did not reach the certified tail tolerance")
        e = math.exp(-z * z * n)
        rt = math.sqrt(n)
        add(acc1, rt * e)
        add(acc2, e / rt)
        first1 = math.sqrt(n + 1) * math.exp(-z * z * (n + 1))
        r1 = math.sqrt(1.0 + 1.0 / (n + 1)) * q
        if r1 < 1.0:
            tail1 = first1 / (1.0 - r1)
            tail2 = math.exp(-z * z * (n + 1)) / math.sqrt(n + 1) / (1.0 - q)
            if tail1 < _SERIES_TAIL_TOL and tail2 < _SERIES_TAIL_TOL:
                return acc1[0] + acc1[1], tail1, acc2[0] + acc2[1], tail2, n


def check_lemma3(z_grid: Iterable[float] = tuple(np.arange(1, 31) / 10)) -> InequalityReport:
    """Integral estimates of the two exponential series.

    sqrt(pi)/(2 z^3) - 1/(z sqrt(2e)) <= S1 <= sqrt(pi)/(2 z^3) + 1/(z sqrt(2e))
    S2 <= sqrt(pi)/z

    Checked with the certified tails: S1_partial is a lower bound of S1,
    S1_partial + tail an upper bound, and likewise for S2.
    """
    rows_lo, rows_up, rows_s2 = [], [], []
    zs = list(z_grid)
    for z in zs:
        s1, tail1, s2, tail2, _ = _series_with_tail(z)
        mid = math.sqrt(math.pi) / (2.0 * z**3)
        dev = 1.0 / (z * math.sqrt(2.0 * math.e))
        p = np.array([[z, 0.0]])
        rows_lo.append(_check_pairs(f"S1_lower@{z:g}", np.array([mid - dev]), np.array([s1]), p))
        rows_up.append(
            _check_pairs(f"S1_upper@{z:g}", np.array([s1 + tail1]), np.array([mid + dev]), p)
        )
        rows_s2.append(
            _check_pairs(f"S2_upper@{z:g}", np.array([s2 + tail2]), np.array([math.sqrt(math.pi) / z]), p)
        )
    grid = f"z in [{zs[0]:g}, {zs[-1]:g}], {len(zs)} points, tail tol {_SERIES_TAIL_TOL:g}"
    return InequalityReport("lemma3", grid, tuple(rows_lo + rows_up + rows_s2))
