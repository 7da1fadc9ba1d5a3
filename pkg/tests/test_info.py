"""Divergence conventions, binomial pmf accuracy, inequality suites."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdlpred.info import (
    InequalityReport,
    _series_with_tail,
    binom_pmf,
    binom_pmf_window,
    check_lemma1,
    check_lemma2,
    check_lemma3,
    kl,
    kl_nats,
)

probs = st.floats(1e-9, 1.0 - 1e-9, allow_nan=False)


class TestKl:
    def test_identity_is_exact_zero(self):
        for t in (0.1, 0.25, 0.5, 0.9):
            assert kl(t, t).value == 0.0

    def test_reference_value(self):
        assert kl_nats(0.5, 0.25) == pytest.approx(0.5 * math.log(4 / 3), abs=1e-15)

    def test_boundary_alpha_zero(self):
        assert kl_nats(0.0, 0.5) == pytest.approx(math.log(2), abs=1e-15)
        assert kl(0.0, 0.5).boundary

    def test_zero_over_zero_convention(self):
        assert kl(0.0, 0.0).value == 0.0
        assert kl(1.0, 1.0).value == 0.0

    def test_infinite_cases(self):
        assert kl_nats(0.3, 0.0) == math.inf
        assert kl_nats(0.3, 1.0) == math.inf
        assert kl_nats(0.0, 1.0) == math.inf

    def test_domain_validated(self):
        with pytest.raises(ValueError):
            kl_nats(1.2, 0.5)

    @given(probs, probs)
    def test_nonnegative(self, a, t):
        assert kl_nats(a, t) >= 0.0

    def test_flip_symmetric_on_dyadic_grid(self):
        """Bit-flip symmetry at 1e-15 on a grid whose complements are
        float-exact (m/1024), so no error enters through 1-x itself."""
        grid = [m / 1024 for m in range(1, 1024)]
        for a in (1 / 1024, 373 / 1024, 512 / 1024, 1010 / 1024):
            for t in grid:
                lhs = kl_nats(a, t)
                rhs = kl_nats(1.0 - a, 1.0 - t)
                assert abs(lhs - rhs) <= 1e-15 * max(1.0, lhs)

    @given(st.floats(0.001, 0.999), st.floats(0.001, 0.999))
    def test_flip_symmetric_random(self, a, t):
        # 1-t rounds here, so allow the induced |d/dtheta| * ulp wiggle
        assert kl_nats(a, t) == pytest.approx(kl_nats(1.0 - a, 1.0 - t), abs=1e-12, rel=1e-12)

    def test_convex_in_second_argument(self):
        """Sampled second differences along theta stay >= -1e-12."""
        thetas = np.linspace(0.05, 0.95, 181)
        for a in (0.2, 0.5, 0.77):
            d = np.array([kl_nats(a, t) for t in thetas])
            assert np.min(np.diff(d, 2)) >= -1e-12


class TestBinomPmf:
    def test_fair_coin(self):
        assert binom_pmf(2, 1, 0.5) == pytest.approx(0.5, abs=1e-15)

    def test_quarter(self):
        assert binom_pmf(4, 1, 0.25) == pytest.approx(27 / 64, rel=1e-14)

    def test_all_ones(self):
        assert binom_pmf(10, 10, 0.5) == pytest.approx(2.0**-10, rel=1e-14)

    def test_point_masses(self):
        assert binom_pmf(5, 0, 0.0) == 1.0
        assert binom_pmf(5, 3, 0.0) == 0.0
        assert binom_pmf(5, 5, 1.0) == 1.0

    def test_against_exact_rational_to_n_64(self):
        """Relative error <= 1e-12 against the big-rational value."""
        for n in (1, 2, 7, 19, 33, 64):
            for t in (Fraction(1, 4), Fraction(3, 16), Fraction(1, 2)):
                tf = float(t)
                for k in range(n + 1):
                    exact = Fraction(math.comb(n, k)) * t**k * (1 - t) ** (n - k)
                    assert binom_pmf(n, k, tf) == pytest.approx(float(exact), rel=1e-12)

    def test_sums_to_one(self):
        for n in (1, 5, 40, 333, 1500):
            s = sum(binom_pmf(n, k, 0.37) for k in range(n + 1))
            assert abs(s - 1.0) <= 1e-10

    def test_window_recurrence_matches_direct(self):
        w = binom_pmf_window(50, 10, 30, 0.37)
        direct = [binom_pmf(50, k, 0.37) for k in range(10, 31)]
        assert np.allclose(w, direct, rtol=1e-11)

    def test_window_validation(self):
        with pytest.raises(ValueError):
            binom_pmf_window(10, 5, 3, 0.5)


class TestLemma1Suite:
    def test_zero_violations(self):
        r = check_lemma1(count=10_000)
        assert r.ok
        assert r.worst_slack >= -1e-12
        names = {s.statement for s in r.statements}
        assert names == {"i", "ii", "iii", "iii_sym", "iv", "iv_sym"}

    def test_lower_bound_example(self):
        # 2*(0.25)^2 = 0.125 <= D(0.5||0.25)
        assert 2 * 0.25**2 <= kl_nats(0.5, 0.25)

    def test_equality_case(self):
        assert kl_nats(0.5, 0.5) == 0.0  # all statements reduce to 0 <= 0

    def test_domain_boundary_pair(self):
        d = kl_nats(0.25, 0.75)
        assert d <= (8 / 3) * 0.25

    @settings(max_examples=300)
    @given(probs, probs)
    def test_statement_i_everywhere(self, a, b):
        assert 2.0 * (a - b) ** 2 <= kl_nats(a, b) + 1e-12

    @settings(max_examples=300)
    @given(st.floats(0.25, 0.75), st.floats(0.25, 0.75))
    def test_statement_ii_on_domain(self, a, b):
        assert kl_nats(a, b) <= (8 / 3) * (a - b) ** 2 + 1e-12


class TestLemma2Suite:
    def test_small_sweep_clean(self):
        r = check_lemma2(n_max=300)
        assert r.ok
        assert r.worst_slack >= -1e-12

    def test_reference_envelope_point(self):
        # n=2, k=1, fair coin: pmf 1/2 under the upper envelope 1/sqrt(pi)
        up = 1.0 / math.sqrt(2 * math.pi * 0.25 * 2)
        assert binom_pmf(2, 1, 0.5) <= up

    def test_brackets_large_n(self):
        n, k, t0 = 100, 50, 0.5
        a = k / n
        lo = math.exp(-n * kl_nats(a, t0)) / math.sqrt(8 * a * (1 - a) * n)
        hi = math.exp(-n * kl_nats(a, t0)) / math.sqrt(2 * math.pi * a * (1 - a) * n)
        assert lo <= binom_pmf(n, k, t0) <= hi


class TestLemma3Suite:
    def test_z1_inside_envelope(self):
        s1, t1, s2, t2, _ = _series_with_tail(1.0)
        mid = math.sqrt(math.pi) / 2
        dev = 1.0 / math.sqrt(2 * math.e)
        assert mid - dev <= s1 and s1 + t1 <= mid + dev
        assert s1 == pytest.approx(0.70724, abs=5e-4)
        assert s2 + t2 <= math.sqrt(math.pi)

    def test_z3_first_term_dominates(self):
        s1, _, _, _, _ = _series_with_tail(3.0)
        assert s1 == pytest.approx(math.exp(-9.0), rel=1e-3)

    def test_grid_clean(self):
        r = check_lemma3()
        assert r.ok
        assert r.worst_slack >= -1e-12

    def test_tiny_z_rejected_with_bound(self):
        with pytest.raises(ValueError, match="feasible z"):
            _series_with_tail(1e-6)

    def test_tails_certified(self):
        """Partial sums plus tails really bracket a finer evaluation."""
        import mpmath

        for z in (0.3, 1.0):
            s1, t1, s2, t2, _ = _series_with_tail(z)
            with mpmath.workdps(40):
                ref1 = mpmath.nsum(lambda n: mpmath.sqrt(n) * mpmath.exp(-(z**2) * n), [1, mpmath.inf])
                ref2 = mpmath.nsum(lambda n: mpmath.exp(-(z**2) * n) / mpmath.sqrt(n), [1, mpmath.inf])
            assert s1 - 1e-14 <= ref1 <= s1 + t1 + 1e-14
            assert s2 - 1e-14 <= ref2 <= s2 + t2 + 1e-14


class TestReportPlumbing:
    def test_merge_sums_and_minimizes(self):
        a = check_lemma1(count=500, seed=1)
        b = check_lemma1(count=500, seed=2)
        m = InequalityReport.merge([a, b])
        assert m.violations == a.violations + b.violations
        assert m.worst_slack == min(a.worst_slack, b.worst_slack)
        s = {x.statement for x in m.statements}
        assert s == {x.statement for x in a.statements}

    def test_csv_rows_shape(self):
        r = check_lemma3([1.0])
        rows = r.csv_rows()
        assert all(len(row) == 5 for row in rows)
        assert all(row[0] == "lemma3" for row in rows)
