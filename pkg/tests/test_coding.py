"""Complexity assignments: code lengths, enumeration, certified Kraft sums."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mdlpred.coding import (
    ComplexityAssignment,
    enumerate_qbstar,
    example_coding,
    kraft_sum,
    kw_example,
    uniform_coding,
)
from mdlpred.dyadic import Dyadic, from_bits, length, parse_dyadic


class TestKwExample:
    def test_endpoints_cost_two_bits(self):
        assert kw_example(Dyadic.zero()) == 2.0
        assert kw_example(Dyadic.one()) == 2.0

    def test_half(self):
        assert kw_example(parse_dyadic("1/2")) == 3.0

    def test_length_four(self):
        assert kw_example(parse_dyadic("3/16")) == 8.0

    def test_five_32(self):
        assert kw_example(parse_dyadic("5/32")) == 9.0

    def test_dominates_bit_length(self):
        for t in enumerate_qbstar(8):
            if length(t) >= 1:
                assert kw_example(t) >= length(t)


class TestEnumeration:
    def test_max_len_1(self):
        assert [str(t) for t in enumerate_qbstar(1)] == ["0", "0.1", "1"]

    def test_max_len_2(self):
        fr = [t.as_fraction() for t in enumerate_qbstar(2)]
        assert fr == [0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1]

    @pytest.mark.parametrize("max_len", [0, 1, 3, 6, 10])
    def test_count(self, max_len):
        assert len(enumerate_qbstar(max_len)) == 2 + (1 << max_len) - 1

    def test_sorted_and_unique(self):
        ts = enumerate_qbstar(7)
        fr = [t.as_fraction() for t in ts]
        assert fr == sorted(set(fr))

    def test_size_guard(self):
        with pytest.raises(ValueError):
            enumerate_qbstar(25)


class TestKraftSum:
    def test_two_halves(self):
        ts = enumerate_qbstar(1)[:2]
        assert kraft_sum(uniform_coding(ts, 1.0)) == 1.0

    def test_equal_weight_cluster(self):
        # eight parameters at complexity 3: exactly one
        ts = enumerate_qbstar(3)[:8]
        assert kraft_sum(uniform_coding(ts, 3.0)) == 1.0

    @pytest.mark.parametrize("max_len", range(0, 15))
    def test_example_coding_sub_kraft(self, max_len):
        assert kraft_sum(example_coding(max_len)) <= 1.0

    def test_upward_rounding_dominates_exact_sum(self):
        """The accumulated float is an upper bound of the exact rational sum."""
        for max_len in range(0, 11):
            a = example_coding(max_len)
            exact = sum(Fraction(1, 1 << int(kw)) for _, kw in a.entries)
            assert Fraction(kraft_sum(a)) >= exact

    @given(st.lists(st.floats(0.0, 60.0, allow_nan=False), min_size=1, max_size=50))
    def test_upward_rounding_random_kws(self, kws):
        import mpmath

        thetas = enumerate_qbstar(9)[: len(kws)]
        a = ComplexityAssignment(tuple(zip(thetas, kws)))
        with mpmath.workdps(60):
            exact = sum(mpmath.power(2, -kw) for kw in kws)
            assert kraft_sum(a) >= exact


class TestAssignment:
    def test_negative_kw_rejected(self):
        with pytest.raises(ValueError):
            ComplexityAssignment(((Dyadic.zero(), -1.0),))

    def test_duplicate_rejected(self):
        with pytest.raises(ValueError):
            ComplexityAssignment(((Dyadic.zero(), 1.0), (Dyadic.zero(), 2.0)))

    def test_missing_lookup_is_error(self):
        a = uniform_coding([Dyadic.zero()], 1.0)
        with pytest.raises(KeyError):
            a.kw(Dyadic.one())

    def test_declared_sub_kraft_checked(self):
        ts = enumerate_qbstar(1)
        with pytest.raises(ValueError):
            ComplexityAssignment(tuple((t, 0.5) for t in ts), sub_kraft=True)

    def test_weight(self):
        a = uniform_coding([from_bits([1])], 3.0)
        assert a.weight(from_bits([1])) == 0.125
