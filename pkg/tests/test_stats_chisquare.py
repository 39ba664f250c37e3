"""Pearson chi-square test of independence on 2x2 tables."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sourcescope.errors import ZeroMarginError
from sourcescope.stats import ChiSquareResult, ContingencyTable2x2, chi_square_test

counts_strategy = st.tuples(st.integers(1, 200), st.integers(1, 200),
                            st.integers(1, 200), st.integers(1, 200))


class TestStatistic:
    def test_closed_form_value(self):
        result = chi_square_test(ContingencyTable2x2(90, 10, 30, 70))
        assert result.statistic == 75.0
        assert result.df == 1
        assert result.expected_frequency_assumption_met

    def test_independence_gives_zero(self):
        result = chi_square_test(ContingencyTable2x2(50, 50, 50, 50))
        assert result.statistic == 0.0
        assert result.p_value == 1.0

    def test_expected_frequency_flag(self):
        result = chi_square_test(ContingencyTable2x2(2, 3, 4, 1))
        assert not result.expected_frequency_assumption_met

    def test_zero_margin(self):
        with pytest.raises(ZeroMarginError):
            chi_square_test(ContingencyTable2x2(5, 5, 0, 0))

    @settings(max_examples=80, deadline=None)
    @given(counts_strategy)
    def test_swap_invariance(self, counts):
        n11, n10, n01, n00 = counts
        base = chi_square_test(ContingencyTable2x2(n11, n10, n01, n00))
        # simultaneous row and column swap
        swapped = chi_square_test(ContingencyTable2x2(n00, n01, n10, n11))
        assert base.statistic == pytest.approx(swapped.statistic, rel=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(counts_strategy, st.integers(2, 7))
    def test_linear_scaling(self, counts, factor):
        base = chi_square_test(ContingencyTable2x2(*counts))
        scaled = chi_square_test(ContingencyTable2x2(*(factor * c for c in counts)))
        assert scaled.statistic == pytest.approx(factor * base.statistic, rel=1e-10)


class TestCorrection:
    def test_yates_shrinks_statistic(self):
        table = ContingencyTable2x2(30, 10, 12, 28)
        plain = chi_square_test(table)
        corrected = chi_square_test(table, yates=True)
        assert corrected.statistic < plain.statistic
        assert corrected.p_value > plain.p_value

    def test_yates_never_negative(self):
        table = ContingencyTable2x2(26, 25, 25, 24)  # tiny association
        corrected = chi_square_test(table, yates=True)
        assert corrected.statistic >= 0.0


class TestResultShape:
    def test_fields(self):
        result = chi_square_test(ContingencyTable2x2(90, 10, 30, 70))
        assert isinstance(result, ChiSquareResult)
        assert 0.0 <= result.p_value <= 1.0
