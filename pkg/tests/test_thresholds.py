"""
Tests for the closed-form thresholds and the known equilibrium patterns.
"""

from fractions import Fraction

import pytest

from analysis.known_patterns import (
    ALL_PAY_X2_FAIR_MAX_N,
    known_se_patterns,
    stepped_two_thirds,
    value_minus_one,
)
from analysis.thresholds import (
    FairTiesClass,
    fair_ties_class,
    g_threshold,
    prop3_predicate,
    prop3_threshold,
    prop4_highn_predicate,
    s_closed_form,
    s_subset_sum,
    threshold_report,
)
from games.data_schemas import AuctionSpec, Structure, TieRule
from solvers.symmetric_solver import verify_symmetric

FP, AP = Structure.FIRST_PRICE, Structure.ALL_PAY
FAIR, NONE = TieRule.FAIR_TIES, TieRule.NO_WINNER_ON_TIES


# ----------------------------------------------------------------------
# First price without ties


@pytest.mark.parametrize("n,x,expected", [
    (3, 13, True),
    (3, 3, False),
    (3, 4, True),
    (4, 4, False),
    (4, 5, True),
    (5, 6, False),
    (5, 7, True),
    (6, 7, False),
    (6, 8, True),
    (10, 13, False),
    (10, 14, True),
    (693, 999, True),
])
def test_first_price_threshold(n, x, expected):
    assert prop3_predicate(n, x) is expected


BOUNDARIES = {3: (3, 4), 4: (4, 5), 5: (6, 7), 6: (7, 8)}


@pytest.mark.parametrize("n", sorted(BOUNDARIES))
def test_value_minus_one_holds_only_up_to_the_threshold(n):
    below, above = BOUNDARIES[n]
    assert below < prop3_threshold(n) < above
    for x in (below - 1, below, above, above + 1):
        spec = AuctionSpec.canonical_game(FP, NONE, n, x)
        holds = verify_symmetric(spec, value_minus_one(x + 1)).is_equilibrium
        assert holds is not prop3_predicate(n, x)


@pytest.mark.parametrize("n", range(3, 12))
def test_exact_predicate_agrees_with_decimal_threshold(n):
    threshold = prop3_threshold(n)
    for x in range(1, 40):
        if abs(x - threshold) > 1e-9:
            assert prop3_predicate(n, x) == (x > threshold)


def test_first_price_threshold_needs_three_bidders():
    with pytest.raises(ValueError):
        prop3_predicate(2, 10)
    with pytest.raises(ValueError):
        prop3_predicate(3, 0)


# ----------------------------------------------------------------------
# All-pay many bidders


def test_g_threshold():
    assert g_threshold(2).approx == pytest.approx(1.7095, abs=1e-4)
    assert not prop4_highn_predicate(2, 2)
    assert prop4_highn_predicate(3, 2)
    assert prop4_highn_predicate(5, 100)
    with pytest.raises(ValueError):
        g_threshold(1)


@pytest.mark.parametrize("x", [2, 3, 10, 50])
def test_g_exceeded_by_matches_decimal(x):
    g = g_threshold(x)
    for m in range(1, 120):
        if abs(m - g.approx) > 1e-9:
            assert g.exceeded_by(m) == (m > g.approx)


# ----------------------------------------------------------------------
# Fair-ties win share


@pytest.mark.parametrize("n", range(1, 13))
def test_closed_form_matches_subset_sum(n):
    for x in range(1, 31):
        p = Fraction(1, x + 1)
        assert s_closed_form(n, p) == s_subset_sum(n, p)


@pytest.mark.parametrize("x", [1, 4, 10])
def test_win_share_decreases_in_n(x):
    p = Fraction(1, x + 1)
    shares = [s_closed_form(n, p) for n in range(1, 15)]
    assert all(a > b for a, b in zip(shares, shares[1:]))


def test_win_share_edge_cases():
    assert s_closed_form(1, Fraction(1, 3)) == 1
    assert s_closed_form(4, Fraction(1)) == Fraction(1, 4)
    assert s_closed_form(4, Fraction(1, 5)) == Fraction(369, 500)
    with pytest.raises(ValueError):
        s_closed_form(3, Fraction(0))


# ----------------------------------------------------------------------
# Classes and reports


@pytest.mark.parametrize("n,x,expected", [
    (2, 9, FairTiesClass.N2_ODD_SE),
    (2, 3, FairTiesClass.N2_ODD_SE),
    (2, 10, FairTiesClass.N2_EVEN_NO_SE),
    (2, 8, FairTiesClass.OUTSIDE_SCOPE),
    (3, 12, FairTiesClass.N3_MULT3_NO_SE),
    (3, 13, FairTiesClass.N3_OTHER_SE),
    (3, 9, FairTiesClass.OUTSIDE_SCOPE),
    (4, 13, FairTiesClass.OUTSIDE_SCOPE),
])
def test_fair_ties_classes(n, x, expected):
    assert fair_ties_class(n, x) == expected


def test_report_for_two_bidders_leaves_three_bidder_fields_empty():
    report = threshold_report(2, 1)
    assert report.prop3_applies is None
    assert report.prop3_threshold is None
    assert report.g_approx is None
    assert not report.prop4_applies


def test_report_for_three_bidders():
    report = threshold_report(3, 13)
    assert report.prop3_applies
    assert report.prop4_applies
    assert report.prop4_highn
    assert report.fair_ties_class == FairTiesClass.N3_OTHER_SE
    assert report.s_at_uniform_tie == s_closed_form(3, Fraction(1, 14))


# ----------------------------------------------------------------------
# Known patterns


def test_stepped_pattern():
    assert stepped_two_thirds(8).bid_of == (0, 0, 1, 2, 2, 3, 4, 4)
    assert value_minus_one(4).bid_of == (0, 0, 1, 2)


@pytest.mark.parametrize("structure,tie_rule,n,x", [
    *[(FP, NONE, 2, x) for x in range(1, 13)],
    (FP, NONE, 3, 2), (FP, NONE, 3, 3), (FP, NONE, 4, 2), (FP, NONE, 4, 3), (FP, NONE, 4, 4),
    (FP, NONE, 10, 3),
    *[(FP, FAIR, 2, x) for x in (1, 3, 5, 7, 9, 11, 13)],
    (FP, FAIR, 3, 13),
    *[(AP, FAIR, n, 2) for n in range(2, ALL_PAY_X2_FAIR_MAX_N + 1)],
    (AP, NONE, 2, 2),
])
def test_known_patterns_verify(structure, tie_rule, n, x):
    spec = AuctionSpec.canonical_game(structure, tie_rule, n, x)
    patterns = known_se_patterns(spec)
    assert patterns
    for beta in patterns:
        assert verify_symmetric(spec, beta).is_equilibrium


def test_no_prediction_outside_known_classes():
    assert known_se_patterns(AuctionSpec.canonical_game(FP, NONE, 3, 13)) == []
    assert known_se_patterns(AuctionSpec.canonical_game(AP, FAIR, ALL_PAY_X2_FAIR_MAX_N + 1, 2)) == []
    assert known_se_patterns(AuctionSpec.canonical_game(AP, NONE, 3, 2)) == []
    assert known_se_patterns(AuctionSpec.canonical_game(FP, FAIR, 2, 10)) == []
    skewed = AuctionSpec.canonical_game(FP, NONE, 2, 2, pmf=(Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))
    assert known_se_patterns(skewed) == []
