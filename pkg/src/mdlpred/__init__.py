"""Static MDL prediction over discrete Bernoulli classes.

Exact expected square loss for MDL, Bayes-mixture and maximum-likelihood
predictors, nested-interval localization of the true parameter, and
certified numerical suites for the supporting inequalities.
"""

from .coding import ComplexityAssignment, enumerate_qbstar, example_coding, kraft_sum, kw_example
from .dyadic import Dyadic, from_bits, length, parse_dyadic
from .engine import (
    LossCurve,
    LossPoint,
    WindowPolicy,
    cumulative_loss,
    instantaneous_loss,
    interval_contributions,
)
from .info import InequalityReport, KlValue, binom_pmf, check_lemma1, check_lemma2, check_lemma3, kl
from .intervals import (
    Cond14Result,
    DeltaProfile,
    DistortionParams,
    IntervalStep,
    Partition,
    build_construction,
    condition14_check,
    construction_partition,
    delta_profile,
    distortion_params,
    gap_series_bound,
    prop4_partition,
)
from .model import Param, ParamClass, SufficientStat, bayes_predict, beats, mdl_select, ml_select
from .oracle import oracle_expected_loss
from .scenarios import Scenario, distorted_class, finite_class, prop4_class, qbstar_class, resolve_scenario

__all__ = [
    "ComplexityAssignment",
    "Cond14Result",
    "DeltaProfile",
    "DistortionParams",
    "Dyadic",
    "InequalityReport",
    "IntervalStep",
    "KlValue",
    "LossCurve",
    "LossPoint",
    "Param",
    "ParamClass",
    "Partition",
    "Scenario",
    "SufficientStat",
    "WindowPolicy",
    "bayes_predict",
    "beats",
    "binom_pmf",
    "build_construction",
    "check_lemma1",
    "check_lemma2",
    "check_lemma3",
    "condition14_check",
    "construction_partition",
    "cumulative_loss",
    "delta_profile",
    "distorted_class",
    "distortion_params",
    "enumerate_qbstar",
    "example_coding",
    "finite_class",
    "from_bits",
    "gap_series_bound",
    "instantaneous_loss",
    "interval_contributions",
    "kl",
    "kraft_sum",
    "kw_example",
    "length",
    "mdl_select",
    "ml_select",
    "oracle_expected_loss",
    "parse_dyadic",
    "prop4_class",
    "prop4_partition",
    "qbstar_class",
    "resolve_scenario",
]
