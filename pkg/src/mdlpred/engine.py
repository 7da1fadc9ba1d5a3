"""Exact expected instantaneous and cumulative square loss.

For each n the expectation sums pmf(k/n | n) * (pred(k, n) - theta0)^2
over a window of counts k.  The "full" window is every k (exact value,
zero tail); the "hoeffding" window keeps |k/n - theta0| <= c_n/sqrt(n)
with c_n = sqrt(ln(2 n^2)) and accounts the rest by the certified tail
bound 2*exp(-2 c_n^2) * max(theta0, 1-theta0)^2 <= 1/n^2.  The default
policy is full up to n = 10^4 and hoeffding beyond.

Cumulative curves report a lower bound (window sums only; every dropped
term is nonnegative) and an upper bound on the partial sum through the
horizon (window sums plus tails).  Nothing is claimed beyond the
horizon; curves carry `beyond_horizon=True` to make that explicit.

Work is split into fixed chunks of 4096 consecutive n.  Chunks are
independent, results merge in ascending order with compensated
accumulation, so curves are bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._kernels import FLAG_BUF, bayes_window_kernel, mdl_window_kernel
from .info import binom_pmf_window
from .intervals import Partition, trivial_partition
from .model import (
    LN2,
    ParamClass,
    SufficientStat,
    bayes_predict,
    mdl_select,
    ml_select,
)

PREDICTORS = ("mdl", "bayes", "ml")
CHUNK = 4096
DEFAULT_FULL_LIMIT = 10_000
MAX_HORIZON = 1 << 22


@dataclass(frozen=True)
class WindowPolicy:
    kind: str  # "full", "hoeffding" or "auto"
    full_limit: int = DEFAULT_FULL_LIMIT

    def __post_init__(self) -> None:
        if self.kind not in ("full", "hoeffding", "auto"):
            raise ValueError(f"unknown window policy {self.kind!r}")

    @staticmethod
    def parse(text: str) -> "WindowPolicy":
        return WindowPolicy(text.strip().lower())

    def bounds(self, n: int, theta0: float) -> tuple[int, int, float]:
        """(kmin, kmax, tail_bound) for one n."""
        if self.kind == "full" or (self.kind == "auto" and n <= self.full_limit):
            return 0, n, 0.0
        c2 = math.log(2.0 * n * n)
        half = math.sqrt(c2) * math.sqrt(n)
        kmin = max(0, math.ceil(n * theta0 - half))
        kmax = min(n, math.floor(n * theta0 + half))
        if kmin > kmax:  # cannot happen for c >= 0; belt and braces
            kmin = kmax = min(max(int(round(n * theta0)), 0), n)
        worst = max(theta0, 1.0 - theta0)
        tail = 2.0 * math.exp(-2.0 * c2) * worst * worst
        return kmin, kmax, tail


@dataclass(frozen=True)
class LossPoint:
    n: int
    window_loss: float
    tail_bound: float
    predictor: str


@dataclass
class LossCurve:
    scenario: str
    predictor: str
    ns: np.ndarray
    window_loss: np.ndarray
    tail_bound: np.ndarray
    cumulative_lower: np.ndarray
    cumulative_upper: np.ndarray
    partition_labels: tuple[str, ...]
    contributions: np.ndarray  # (selected cell, alpha cell), catch-all last
    beyond_horizon: bool = True

    @property
    def horizon(self) -> int:
        return int(self.ns[-1])

    def point(self, n: int) -> LossPoint:
        i = n - int(self.ns[0])
        return LossPoint(n, float(self.window_loss[i]), float(self.tail_bound[i]), self.predictor)

    def by_selected(self) -> dict[str, float]:
        sums = self.contributions.sum(axis=1)
        return dict(zip(self.partition_labels + ("other",), map(float, sums)))

    def by_alpha(self) -> dict[str, float]:
        sums = self.contributions.sum(axis=0)
        return dict(zip(self.partition_labels + ("other",), map(float, sums)))

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("n,window_loss,tail_bound,cumulative_lower,cumulative_upper,predictor,scenario\n")
            for i in range(len(self.ns)):
                fh.write(
                    f"{int(self.ns[i])},{float(self.window_loss[i])!r},{float(self.tail_bound[i])!r},"
                    f"{float(self.cumulative_lower[i])!r},{float(self.cumulative_upper[i])!r},"
                    f"{self.predictor},{self.scenario}\n"
                )


# -- precomputed per-class arrays ---------------------------------------------


@dataclass
class _ClassData:
    pc: ParamClass
    partition: Partition
    theta0: float
    thv: np.ndarray  # interior values, ascending
    line_a: np.ndarray  # -ln(theta)
    line_b: np.ndarray  # -ln(1-theta)
    pen_mdl: np.ndarray
    pen_ml: np.ndarray
    interior_index: np.ndarray  # interior position -> class index
    selcell: np.ndarray
    has_zero: bool
    kw_zero: float
    cell_zero: int
    has_one: bool
    kw_one: float
    cell_one: int
    cell_of_param: np.ndarray
    acut_num: np.ndarray
    acut_den: np.ndarray
    acut_float: np.ndarray
    agap: np.ndarray
    acell_one: int
    kws: np.ndarray
    values: np.ndarray
    logt: np.ndarray
    log1mt: np.ndarray
    rho: np.ndarray
    bayes_block: int


def _prepare(pc: ParamClass, partition: Partition) -> _ClassData:
    if not pc.floats_distinct():
        raise ValueError(
            "class values collapse in float64; the engine needs distinct doubles"
        )
    values = pc.values()
    kws = pc.kws()
    # a nondegenerate true parameter is itself interior, so the kernel
    # paths always see at least one line; {0,1}-only classes take the
    # degenerate route
    interior = [i for i, p in enumerate(pc.params) if 0.0 < p.value < 1.0]
    thv = values[interior]
    cuts = partition.cut_arrays()
    cell_of_param = np.array(
        [partition.index_of(p.exact_fraction()) for p in pc.params], dtype=np.int64
    )
    has_zero = bool(values[0] == 0.0)
    has_one = bool(values[-1] == 1.0)
    with np.errstate(divide="ignore"):
        logt = np.log(thv)
        log1mt = np.log1p(-thv)
    b = logt - log1mt
    spread = float(b.max() - b.min()) if len(b) else 0.0
    # a column zeroed at a block head may rise at most block*spread nats,
    # which must stay under the ~745-nat double floor with margin
    bayes_block = max(1, min(256, int(700.0 / max(spread, 1e-12))))
    return _ClassData(
        pc=pc,
        partition=partition,
        theta0=pc.theta0,
        thv=thv,
        line_a=-np.log(thv),
        line_b=-np.log1p(-thv),
        pen_mdl=kws[interior] * LN2,
        pen_ml=np.zeros(len(interior)),
        interior_index=np.array(interior, dtype=np.int64),
        selcell=cell_of_param[interior],
        has_zero=has_zero,
        kw_zero=float(kws[0]) if has_zero else 0.0,
        cell_zero=int(cell_of_param[0]) if has_zero else 0,
        has_one=has_one,
        kw_one=float(kws[-1]) if has_one else 0.0,
        cell_one=int(cell_of_param[-1]) if has_one else 0,
        cell_of_param=cell_of_param,
        acut_num=cuts.nums,
        acut_den=cuts.dens,
        acut_float=cuts.floats,
        agap=cuts.gap_cell,
        acell_one=cuts.at_one,
        kws=kws,
        values=values,
        logt=logt,
        log1mt=log1mt,
        rho=thv / (1.0 - thv),
        bayes_block=bayes_block,
    )


# -- per-n evaluation ----------------------------------------------------------


def _log_pmf_at(n: int, k: int, theta0: float) -> float:
    return (
        math.lgamma(n + 1)
        - math.lgamma(k + 1)
        - math.lgamma(n - k + 1)
        + k * math.log(theta0)
        + (n - k) * math.log1p(-theta0)
    )


def _select_point(cd: _ClassData, n: int, policy: WindowPolicy, use_kw: bool, out: np.ndarray) -> tuple[float, float]:
    """One n of MDL (use_kw) or ML (not use_kw) loss, accumulated into out."""
    theta0 = cd.theta0
    kmin, kmax, tail = policy.bounds(n, theta0)
    k_center = min(max(int(round(n * theta0)), kmin), kmax)
    width = kmax - kmin + 1
    pmf = np.empty(width)
    flags = np.empty(FLAG_BUF, dtype=np.int64)
    pen = cd.pen_mdl if use_kw else cd.pen_ml
    pz = cd.kw_zero * LN2 if use_kw else 0.0
    po = cd.kw_one * LN2 if use_kw else 0.0
    wloss, nflags = mdl_window_kernel(
        n,
        kmin,
        kmax,
        theta0,
        _log_pmf_at(n, k_center, theta0),
        k_center,
        theta0 / (1.0 - theta0),
        cd.thv,
        cd.line_a,
        cd.line_b,
        pen,
        cd.has_zero,
        pz,
        cd.cell_zero,
        cd.has_one,
        po,
        cd.cell_one,
        cd.selcell,
        cd.acut_num,
        cd.acut_den,
        cd.agap,
        cd.acell_one,
        out,
        pmf,
        flags,
    )
    if nflags > FLAG_BUF:
        raise RuntimeError(
            f"flag buffer overflow at n={n}: {nflags} near-ties; class too degenerate"
        )
    select = mdl_select if use_kw else ml_select
    for f in range(nflags):
        k = int(flags[f])
        idx = select(cd.pc, SufficientStat(n, k))
        val = cd.values[idx]
        cell_s = int(cd.cell_of_param[idx])
        cell_a = cd.partition.index_of(Fraction(k, n))
        term = float(pmf[k - kmin]) * (val - theta0) ** 2
        out[cell_s, cell_a] += term
        wloss += term
    return wloss, tail


def _bayes_point(cd: _ClassData, n: int, policy: WindowPolicy, out: np.ndarray) -> tuple[float, float]:
    theta0 = cd.theta0
    kmin, kmax, tail = policy.bounds(n, theta0)
    k_center = min(max(int(round(n * theta0)), kmin), kmax)
    pmf = np.empty(kmax - kmin + 1)
    wloss = bayes_window_kernel(
        n,
        kmin,
        kmax,
        theta0,
        _log_pmf_at(n, k_center, theta0),
        k_center,
        theta0 / (1.0 - theta0),
        cd.thv,
        -cd.pen_mdl,  # ln of the prior weights
        cd.logt,
        cd.log1mt,
        cd.rho,
        cd.has_zero,
        -cd.kw_zero * LN2,
        cd.has_one,
        -cd.kw_one * LN2,
        cd.acut_num,
        cd.acut_den,
        cd.acut_float,
        cd.agap,
        cd.acell_one,
        out,
        pmf,
        cd.bayes_block,
    )
    return float(wloss), tail


def _degenerate_point(
    cd: _ClassData, n: int, predictor: str, out: np.ndarray
) -> tuple[float, float]:
    """theta0 in {0,1}: the sample is deterministic, one k carries all mass."""
    theta0 = cd.theta0
    k = 0 if theta0 == 0.0 else n
    stat = SufficientStat(n, k)
    if predictor == "bayes":
        pred = bayes_predict(cd.pc, stat)
        cell_s = _float_cell(cd, pred)
    else:
        idx = mdl_select(cd.pc, stat) if predictor == "mdl" else ml_select(cd.pc, stat)
        pred = cd.values[idx]
        cell_s = int(cd.cell_of_param[idx])
    cell_a = cd.partition.index_of(Fraction(k, max(n, 1)))
    term = (pred - theta0) ** 2
    out[cell_s, cell_a] += term
    return term, 0.0


def _float_cell(cd: _ClassData, x: float) -> int:
    if x >= 1.0:
        return cd.acell_one
    g = int(np.searchsorted(cd.acut_float, x, side="right")) - 1
    g = min(max(g, 0), len(cd.agap) - 1)
    return int(cd.agap[g])


# -- chunked drivers -----------------------------------------------------------


def _run_range(
    pc: ParamClass,
    partition: Partition,
    predictor: str,
    policy: WindowPolicy,
    n0: int,
    n1: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Loss points for n0..n1 inclusive plus the contribution matrix."""
    cd = _prepare(pc, partition)
    nb = partition.n_bins
    out = np.zeros((nb, nb))
    wl = np.empty(n1 - n0 + 1)
    tb = np.empty(n1 - n0 + 1)
    degenerate = cd.theta0 in (0.0, 1.0)
    for n in range(n0, n1 + 1):
        if degenerate:
            w, t = _degenerate_point(cd, n, predictor, out)
        elif predictor == "bayes":
            w, t = _bayes_point(cd, n, policy, out)
        elif predictor in ("mdl", "ml"):
            w, t = _select_point(cd, n, policy, predictor == "mdl", out)
        else:
            raise ValueError(f"unknown predictor {predictor!r}")
        wl[n - n0] = w
        tb[n - n0] = t
    return wl, tb, out


def _chunk_task(args) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
    i, pc, partition, predictor, policy, n0, n1 = args
    wl, tb, out = _run_range(pc, partition, predictor, policy, n0, n1)
    return i, wl, tb, out


def _neumaier_running(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    s = 0.0
    c = 0.0
    for i in range(len(x)):
        v = float(x[i])
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        out[i] = s + c
    return out


def instantaneous_loss(
    pc: ParamClass,
    predictor: str,
    n: int,
    window: WindowPolicy | str = "auto",
    partition: Partition | None = None,
) -> LossPoint:
    """Expected square loss at one n under the given window policy."""
    if n < 1:
        raise ValueError("n must be >= 1")
    policy = WindowPolicy.parse(window) if isinstance(window, str) else window
    part = partition if partition is not None else trivial_partition()
    wl, tb, _ = _run_range(pc, part, predictor, policy, n, n)
    return LossPoint(n, float(wl[0]), float(tb[0]), predictor)


def cumulative_loss(
    pc: ParamClass,
    predictor: str,
    horizon: int,
    window: WindowPolicy | str = "auto",
    partition: Partition | None = None,
    workers: int = 1,
    scenario: str = "",
) -> LossCurve:
    """Loss curve for n = 1..horizon with running cumulative bounds.

    cumulative_lower is a valid lower bound of the infinite-horizon sum;
    cumulative_upper bounds the partial sum through the horizon only.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if horizon > MAX_HORIZON:
        cost = 10.0 * horizon ** 1.5 / 1e9
        raise ValueError(
            f"horizon {horizon} exceeds the budget {MAX_HORIZON} "
            f"(~{cost:.0f}e9 inner steps); raise MAX_HORIZON deliberately if needed"
        )
    if predictor not in PREDICTORS:
        raise ValueError(f"unknown predictor {predictor!r}")
    policy = WindowPolicy.parse(window) if isinstance(window, str) else window
    part = partition if partition is not None else trivial_partition()

    chunks = [(n0, min(n0 + CHUNK - 1, horizon)) for n0 in range(1, horizon + 1, CHUNK)]
    tasks = [(i, pc, part, predictor, policy, c[0], c[1]) for i, c in enumerate(chunks)]
    results: list[tuple[np.ndarray, np.ndarray, np.ndarray] | None] = [None] * len(chunks)
    if workers <= 1 or len(chunks) == 1:
        for t in tasks:
            i, wl, tb, out = _chunk_task(t)
            results[i] = (wl, tb, out)
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            for i, wl, tb, out in ex.map(_chunk_task, tasks, chunksize=1):
                results[i] = (wl, tb, out)

    window_loss = np.concatenate([r[0] for r in results])
    tail_bound = np.concatenate([r[1] for r in results])
    nb = part.n_bins
    contributions = np.zeros((nb, nb))
    for r in results:  # ascending chunk order keeps merges deterministic
        contributions += r[2]
    return LossCurve(
        scenario=scenario or pc.name,
        predictor=predictor,
        ns=np.arange(1, horizon + 1, dtype=np.int64),
        window_loss=window_loss,
        tail_bound=tail_bound,
        cumulative_lower=_neumaier_running(window_loss),
        cumulative_upper=_neumaier_running(window_loss + tail_bound),
        partition_labels=part.labels,
        contributions=contributions,
    )


def interval_contributions(
    pc: ParamClass,
    predictor: str,
    horizon: int,
    partition: Partition,
    window: WindowPolicy | str = "auto",
    workers: int = 1,
) -> LossCurve:
    """Cumulative run with per-cell accounting; see LossCurve.by_selected /
    by_alpha for the two marginals of the (selected, alpha) matrix."""
    return cumulative_loss(
        pc, predictor, horizon, window=window, partition=partition, workers=workers
    )
