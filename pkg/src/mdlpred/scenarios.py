"""Named constructors for the model classes the experiments run on.

Every experiment config names a scenario so runs are reproducible from a
single line.  Built-ins:

  prop4     N, [kw0]            the equal-complexity cluster 1/2 + 2^-k-1
  qbstar    max_len, theta0      all binary fractions up to max_len with
                                 the built-in prefix-code lengths
  distorted poly, max_len, t0, eps   polynomial image of the qbstar grid
  finite    values, kws, true_index  arbitrary finite class

Constructors return the resolved ParamClass plus scenario-specific
extras (natural partition, bound quantities, distortion constants).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .coding import enumerate_qbstar, kw_example
from .dyadic import Dyadic, length, parse_dyadic
from .intervals import DistortionParams, Partition, distortion_params, prop4_partition
from .model import Param, ParamClass


@dataclass(frozen=True)
class Scenario:
    """A resolved scenario: the class plus whatever its bounds need."""

    name: str
    pc: ParamClass
    partition: Partition | None = None
    extras: dict = field(default_factory=dict)


def prop4_class(n_exp: int, kw0: float | None = None) -> Scenario:
    """True parameter 1/2 against 2^N - 1 rivals at 1/2 + 2^-k-1, all at
    complexity N (the true one overridable to probe robustness).

    N > 8 is rejected: the class has 2^N elements and the loss mass sits
    near n ~ 2^(2k), far past any desk-scale horizon.  Note the engine
    additionally needs distinct float values, which caps usable N at 5.
    """
    if not 1 <= n_exp <= 8:
        raise ValueError("N must be within 1..8")
    m = (1 << n_exp) - 1
    entries: list[tuple[Dyadic, float]] = [(Dyadic(1, 1), float(n_exp) if kw0 is None else float(kw0))]
    entries.extend((Dyadic((1 << k) + 1, k + 1), float(n_exp)) for k in range(1, m + 1))
    entries.sort(key=lambda e: e[0].as_fraction())
    params = tuple(Param(d.value, kw, d) for d, kw in entries)
    true_index = next(i for i, (d, _) in enumerate(entries) if d.as_fraction() == Fraction(1, 2))
    pc = ParamClass(params, true_index, name=f"prop4:N={n_exp}")
    lower = (2.0**n_exp - 5.0) / 84.0
    return Scenario(
        pc.name, pc, partition=prop4_partition(n_exp), extras={"lower_bound": lower, "N": n_exp}
    )


def qbstar_class(max_len: int, theta0: Dyadic | str) -> Scenario:
    """All binary fractions up to max_len bits plus the endpoints, coded
    by the built-in prefix code; theta0 must be one of them."""
    t0 = parse_dyadic(theta0) if isinstance(theta0, str) else theta0
    if length(t0) > max_len:
        raise ValueError(f"theta0={t0} has bit length {length(t0)} > max_len={max_len}")
    thetas = enumerate_qbstar(max_len)
    params = tuple(Param(t.value, kw_example(t), t) for t in thetas)
    true_index = next(i for i, t in enumerate(thetas) if t == t0)
    pc = ParamClass(params, true_index, name=f"qbstar:max_len={max_len},theta0={t0}")
    return Scenario(pc.name, pc, extras={"coding": "example-coding"})


def distorted_class(
    coeffs: Sequence[float], max_len: int, t0: Dyadic | str, eps: float
) -> Scenario:
    """Image of the qbstar grid under an injective polynomial.

    Complexities carry over from the pre-image (Kw(phi(t)) = kw of t,
    which is >= bit length of t).  Non-injectivity on the grid is
    rejected with the colliding pre-image pair.
    """
    t0d = parse_dyadic(t0) if isinstance(t0, str) else t0
    if length(t0d) > max_len:
        raise ValueError(f"t0={t0d} has bit length {length(t0d)} > max_len={max_len}")
    hint = distortion_params(coeffs, t0d.value, eps)  # also screens injectivity
    phi = np.polynomial.Polynomial(list(coeffs))
    thetas = enumerate_qbstar(max_len)
    images = [(float(phi(t.value)), t) for t in thetas]
    images.sort()
    for (va, ta), (vb, tb) in zip(images[:-1], images[1:]):
        if va == vb:
            raise ValueError(f"polynomial collides on the grid: phi({ta}) == phi({tb})")
    for v, t in images:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"phi({t}) = {v} leaves [0,1]")
    params = tuple(Param(v, kw_example(t), None) for v, t in images)
    true_index = next(i for i, (_, t) in enumerate(images) if t == t0d)
    pc = ParamClass(params, true_index, name=f"distorted:max_len={max_len},t0={t0d}")
    return Scenario(pc.name, pc, extras={"hint": hint, "coeffs": tuple(coeffs)})


def finite_class(
    values: Sequence[float | str], kws: Sequence[float], true_index: int
) -> Scenario:
    """Arbitrary finite class; reports the small-class bound N + Kw(true)."""
    if len(values) != len(kws):
        raise ValueError("values and kws must have equal length")
    entries = []
    for v, kw in zip(values, kws):
        if isinstance(v, str):
            d = parse_dyadic(v)
            entries.append(Param(d.value, float(kw), d))
        else:
            entries.append(Param(float(v), float(kw), None))
    order = sorted(range(len(entries)), key=lambda i: entries[i].exact_fraction())
    params = tuple(entries[i] for i in order)
    new_true = order.index(true_index)
    pc = ParamClass(params, new_true, name=f"finite:{len(values)}")
    bound = len(params) + pc.kw0
    return Scenario(pc.name, pc, extras={"bound_quantity": bound})


# -- config-facing resolution ---------------------------------------------------


def resolve_scenario(options: dict) -> Scenario:
    """Build a scenario from flat config options (strings allowed)."""
    opts = dict(options)
    name = opts.pop("scenario", None)
    if name is None:
        raise ValueError("config needs a 'scenario' entry")
    if name == "prop4":
        kw0 = opts.get("kw0")
        return prop4_class(int(opts["N"]), float(kw0) if kw0 is not None else None)
    if name == "qbstar":
        return qbstar_class(int(opts["max_len"]), str(opts["theta0"]))
    if name == "distorted":
        coeffs = [float(c) for c in str(opts["poly"]).split(",")]
        return distorted_class(coeffs, int(opts["max_len"]), str(opts["t0"]), float(opts["eps"]))
    if name == "finite":
        values = [v.strip() for v in str(opts["values"]).split(";")]
        kws = [float(v) for v in str(opts["kws"]).split(";")]
        return finite_class(values, kws, int(opts["true_index"]))
    raise ValueError(f"unknown scenario {name!r}")
