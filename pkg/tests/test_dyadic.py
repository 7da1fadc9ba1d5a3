"""Exact binary fractions: canonical form, bit lengths, ordering."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mdlpred.dyadic import Dyadic, from_bits, length, parse_dyadic


class TestFromBits:
    def test_single_bit(self):
        d = from_bits([1])
        assert d.as_fraction() == Fraction(1, 2)
        assert length(d) == 1

    def test_fig_value(self):
        d = from_bits([0, 0, 1, 1])
        assert d.as_fraction() == Fraction(3, 16)
        assert length(d) == 4

    def test_empty_is_zero(self):
        d = from_bits([])
        assert d.as_fraction() == 0
        assert length(d) == 0

    def test_trailing_zero_rejected(self):
        with pytest.raises(ValueError):
            from_bits([1, 0])

    def test_non_binary_digit_rejected(self):
        with pytest.raises(ValueError):
            from_bits([1, 2])


class TestCanonicalForm:
    def test_even_mantissa_rejected(self):
        with pytest.raises(ValueError):
            Dyadic(2, 3)

    def test_endpoints_zero_exponent(self):
        with pytest.raises(ValueError):
            Dyadic(4, 2)  # value 1 stored non-canonically
        assert Dyadic.make(4, 2).exponent == 0

    def test_make_reduces(self):
        assert Dyadic.make(6, 4) == Dyadic(3, 3)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            Dyadic(9, 3)

    def test_length_examples(self):
        assert length(Dyadic.make(3, 3)) == 3  # 0.011
        assert length(Dyadic.zero()) == 0
        assert length(Dyadic.one()) == 0


class TestRoundTrip:
    def test_exhaustive_to_length_20(self):
        """from_bits then digit extraction is the identity on canonical
        strings; exhaustive over every length <= 20."""
        for e in range(1, 21):
            for m in range(1, 1 << e, 2):
                d = Dyadic(m, e)
                assert from_bits(d.bits()) == d
                assert d.bits()[-1] == 1
                assert length(d) == e

    @given(st.lists(st.integers(0, 1), max_size=40))
    def test_roundtrip_random(self, bits):
        bits = bits + [1] if bits and bits[-1] == 0 else bits
        if bits and bits[-1] != 1:
            bits = bits + [1]
        d = from_bits(bits)
        assert list(d.bits()) == list(bits)


class TestOrdering:
    def test_matches_fraction_order_length_12(self):
        """Comparator order equals exact rational order on every value of
        length <= 12.  Sorting by both total orders and comparing is
        equivalent to checking all pairs, since distinct canonical
        dyadics have distinct values."""
        ds = [Dyadic.zero(), Dyadic.one()]
        ds += [Dyadic(m, e) for e in range(1, 13) for m in range(1, 1 << e, 2)]
        by_cmp = sorted(ds)
        by_fraction = sorted(ds, key=lambda d: d.as_fraction())
        assert by_cmp == by_fraction

    @given(
        st.tuples(st.integers(0, 12), st.integers(0, 1 << 12)),
        st.tuples(st.integers(0, 12), st.integers(0, 1 << 12)),
    )
    def test_pairwise_against_fractions(self, a, b):
        da = Dyadic.make(min(a[1], 1 << a[0]), a[0])
        db = Dyadic.make(min(b[1], 1 << b[0]), b[0])
        assert (da < db) == (da.as_fraction() < db.as_fraction())
        assert (da <= db) == (da.as_fraction() <= db.as_fraction())


class TestParsing:
    @pytest.mark.parametrize(
        "text,frac",
        [
            ("0", Fraction(0)),
            ("1", Fraction(1)),
            ("0.1", Fraction(1, 2)),
            ("0.0011", Fraction(3, 16)),
            ("0.00110", Fraction(3, 16)),
            ("3/16", Fraction(3, 16)),
            ("3/2^4", Fraction(3, 16)),
            ("1/2", Fraction(1, 2)),
        ],
    )
    def test_accepted_forms(self, text, frac):
        assert parse_dyadic(text).as_fraction() == frac

    @pytest.mark.parametrize("text", ["2/3", "0.2", "x", "3/3^4", "0."])
    def test_rejected_forms(self, text):
        with pytest.raises(ValueError):
            parse_dyadic(text)

    def test_str_roundtrip(self):
        assert str(parse_dyadic("3/16")) == "0.0011"
        assert str(Dyadic.zero()) == "0"
        assert str(Dyadic.one()) == "1"


class TestFloatView:
    def test_exactness_flag(self):
        assert Dyadic(3, 4).is_float_exact()
        assert not Dyadic((1 << 60) + 1, 61).is_float_exact()

    def test_value(self):
        assert Dyadic(3, 4).value == 0.1875
