"""
Tests for the symmetric equilibrium solvers.
Exhaustive search results are checked against closed-form predictions,
against the unpruned search, and against the cap fallbacks.
"""

from fractions import Fraction

import pytest

from analysis.continuum_bridge import ContinuousAuction, build_discrete_analogue
from analysis.known_patterns import ceil_half, floor_half, known_se_patterns, stepped_two_thirds, value_minus_one
from games.data_schemas import AuctionSpec, BiddingFunction, Structure, TieRule
from solvers.result_schemas import Certificate
from solvers.symmetric_solver import (
    enumerate_monotone_candidates,
    fair_ties_jump_violations,
    solve_second_price,
    solve_symmetric,
    solve_symmetric_no_ties,
    solve_symmetric_with_ties,
    verify_symmetric,
)

FP, SP, AP = Structure.FIRST_PRICE, Structure.SECOND_PRICE, Structure.ALL_PAY
FAIR, NONE = TieRule.FAIR_TIES, TieRule.NO_WINNER_ON_TIES


def game(structure, tie_rule, n, x):
    return AuctionSpec.canonical_game(structure, tie_rule, n, x)


def bids(report):
    return [beta.bid_of for beta in report.equilibria]


# ----------------------------------------------------------------------
# First price without ties


@pytest.mark.parametrize("x", range(2, 13))
def test_two_bidders_have_exactly_floor_and_ceil(x):
    report = solve_symmetric_no_ties(game(FP, NONE, 2, x))
    assert report.certificate == Certificate.EXHAUSTED
    assert bids(report) == [floor_half(x + 1).bid_of, ceil_half(x + 1).bid_of]
    assert {record.bid_at_one for record in report.branch_log} == {0, 1}


@pytest.mark.slow
@pytest.mark.parametrize("x", range(13, 21))
def test_two_bidders_have_exactly_floor_and_ceil_large_grids(x):
    report = solve_symmetric_no_ties(game(FP, NONE, 2, x))
    assert bids(report) == [floor_half(x + 1).bid_of, ceil_half(x + 1).bid_of]


@pytest.mark.parametrize("n,x", [(3, x) for x in range(4, 13)] + [(4, 5), (4, 6), (4, 8), (5, 7), (5, 9)])
def test_no_symmetric_equilibrium_above_first_price_threshold(n, x):
    report = solve_symmetric(game(FP, NONE, n, x))
    assert report.certificate == Certificate.EXHAUSTED
    assert report.equilibria == []


@pytest.mark.slow
@pytest.mark.parametrize("n,x", [(3, x) for x in range(13, 21)] + [(4, 14), (5, 14), (6, 20)])
def test_no_symmetric_equilibrium_above_first_price_threshold_large(n, x):
    assert solve_symmetric(game(FP, NONE, n, x)).equilibria == []


def test_three_bidders_three_steps():
    report = solve_symmetric(game(FP, NONE, 3, 3))
    assert bids(report) == [(0, 0, 1, 2), (0, 1, 1, 2)]
    assert value_minus_one(4).bid_of in bids(report)


@pytest.mark.parametrize("n,x", [(3, 2), (4, 2), (4, 3), (4, 4), (10, 3)])
def test_value_minus_one_below_threshold(n, x):
    report = solve_symmetric(game(FP, NONE, n, x))
    assert value_minus_one(x + 1) in report.equilibria
    assert len(report.equilibria) <= 2


# ----------------------------------------------------------------------
# All-pay


def test_all_pay_two_steps_fair_ties():
    assert bids(solve_symmetric(game(AP, FAIR, 2, 2))) == [(0, 0, 0), (0, 0, 1)]
    for n in (3, 4):
        assert bids(solve_symmetric(game(AP, FAIR, n, 2))) == [(0, 0, 1)]
    for n in (5, 6):
        assert solve_symmetric(game(AP, FAIR, n, 2)).equilibria == []


def test_all_pay_two_steps_without_ties():
    assert bids(solve_symmetric(game(AP, NONE, 2, 2))) == [(0, 0, 1)]
    for n in (3, 4):
        assert solve_symmetric(game(AP, NONE, n, 2)).equilibria == []


@pytest.mark.parametrize("x", range(10, 15))
@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("tie_rule", [FAIR, NONE])
def test_all_pay_no_equilibrium_from_ten_steps(tie_rule, n, x):
    report = solve_symmetric(game(AP, tie_rule, n, x))
    assert report.certificate == Certificate.EXHAUSTED
    assert report.equilibria == []


# ----------------------------------------------------------------------
# First price with fair ties


def test_two_bidders_fair_ties_odd_grid():
    report = solve_symmetric_with_ties(game(FP, FAIR, 2, 9))
    assert bids(report) == [floor_half(10).bid_of]


@pytest.mark.slow
@pytest.mark.parametrize("x", [11, 13])
def test_two_bidders_fair_ties_odd_grid_large(x):
    assert bids(solve_symmetric_with_ties(game(FP, FAIR, 2, x))) == [floor_half(x + 1).bid_of]


@pytest.mark.slow
@pytest.mark.parametrize("x", [10, 12])
def test_two_bidders_fair_ties_even_grid_has_none(x):
    report = solve_symmetric_with_ties(game(FP, FAIR, 2, x))
    assert report.certificate == Certificate.EXHAUSTED
    assert report.equilibria == []


@pytest.mark.parametrize("x", range(10, 17))
def test_stepped_two_thirds_verifies_unless_x_divisible_by_three(x):
    spec = game(FP, FAIR, 3, x)
    assert verify_symmetric(spec, stepped_two_thirds(x + 1)).is_equilibrium == (x % 3 != 0)


@pytest.mark.slow
@pytest.mark.parametrize("x", range(10, 17))
def test_three_bidders_fair_ties(x):
    spec = game(FP, FAIR, 3, x)
    report = solve_symmetric_with_ties(spec)
    assert report.certificate == Certificate.EXHAUSTED
    if x % 3 == 0:
        assert report.equilibria == []
    else:
        assert stepped_two_thirds(x + 1) in report.equilibria
        assert set(known_se_patterns(spec)) <= set(report.equilibria)


@pytest.mark.slow
def test_three_bidders_fair_ties_fourteen_steps():
    report = solve_symmetric_with_ties(game(FP, FAIR, 3, 14))
    assert report.certificate == Certificate.EXHAUSTED
    assert bids(report) == [(0, 0, 1, 2, 2, 3, 4, 4, 5, 6, 6, 7, 8, 8, 9)]
    assert report.equilibria == [stepped_two_thirds(15)]


def test_jump_bound_check():
    assert fair_ties_jump_violations(floor_half(11)) == []
    assert fair_ties_jump_violations(BiddingFunction(bid_of=(0, 0, 2))) == [2]
    assert fair_ties_jump_violations(BiddingFunction(bid_of=(0,) * 10 + (2,))) == []


# ----------------------------------------------------------------------
# Search consistency


@pytest.mark.parametrize("structure", [FP, AP])
@pytest.mark.parametrize("tie_rule", [FAIR, NONE])
@pytest.mark.parametrize("n", [2, 3])
def test_pruning_never_loses_an_equilibrium(structure, tie_rule, n):
    for x in range(0, 8):
        spec = game(structure, tie_rule, n, x)
        pruned = solve_symmetric(spec, prune=True)
        unpruned = solve_symmetric(spec, prune=False)
        brute = enumerate_monotone_candidates(spec, no_jumps=tie_rule == NONE)
        assert pruned.equilibria == unpruned.equilibria == brute
        assert pruned.stats.leaves_verified <= unpruned.stats.leaves_verified


@pytest.mark.parametrize("spec", [
    game(FP, NONE, 2, 7),
    game(FP, NONE, 3, 3),
    game(FP, FAIR, 2, 7),
    game(AP, FAIR, 3, 2),
])
def test_every_reported_equilibrium_verifies(spec):
    report = solve_symmetric(spec)
    assert report.equilibria
    for beta in report.equilibria:
        assert verify_symmetric(spec, beta).is_equilibrium
        assert beta.is_monotone()


def test_equilibria_do_not_depend_on_delta():
    base = game(FP, NONE, 3, 3)
    scaled = base.with_delta(Fraction(2, 7))
    assert solve_symmetric(base).equilibria == solve_symmetric(scaled).equilibria


# ----------------------------------------------------------------------
# Second price


def test_second_price_fair_ties_is_truthful():
    report = solve_second_price(game(SP, FAIR, 3, 5))
    assert bids(report) == [(0, 1, 2, 3, 4, 5)]
    assert report.certificate == Certificate.ANALYTIC_THRESHOLD


def test_second_price_without_ties_lists_both_extremes():
    report = solve_symmetric(game(SP, NONE, 2, 5))
    assert bids(report) == [(0, 1, 2, 3, 4, 5), (1, 2, 3, 4, 5, 5)]
    assert report.notes


def test_second_price_single_value():
    assert bids(solve_symmetric(game(SP, NONE, 2, 0))) == [(0,)]


# ----------------------------------------------------------------------
# Beyond the search cap


def test_cap_falls_back_on_closed_forms():
    report = solve_symmetric(game(FP, NONE, 2, 10), cap=0)
    assert report.certificate == Certificate.ANALYTIC_THRESHOLD
    assert bids(report) == [floor_half(11).bid_of, ceil_half(11).bid_of]

    report = solve_symmetric(game(FP, FAIR, 2, 11), cap=0)
    assert report.certificate == Certificate.ANALYTIC_THRESHOLD
    assert bids(report) == [floor_half(12).bid_of]

    for spec in (game(AP, FAIR, 2, 10), game(FP, NONE, 3, 13), game(FP, FAIR, 3, 12)):
        report = solve_symmetric(spec, cap=0)
        assert report.certificate == Certificate.ANALYTIC_THRESHOLD
        assert report.equilibria == []
        assert report.reference


@pytest.mark.parametrize("spec", [game(FP, FAIR, 4, 5), game(FP, NONE, 3, 3), game(AP, NONE, 3, 5)])
def test_cap_without_closed_form_is_inconclusive(spec):
    report = solve_symmetric(spec, cap=0)
    assert report.inconclusive
    assert report.equilibria == []


# ----------------------------------------------------------------------
# Input checks


def test_solvers_check_the_tie_rule_and_structure():
    with pytest.raises(ValueError):
        solve_symmetric_no_ties(game(FP, FAIR, 2, 3))
    with pytest.raises(ValueError):
        solve_symmetric_with_ties(game(AP, NONE, 2, 3))
    with pytest.raises(ValueError):
        solve_symmetric_no_ties(game(SP, NONE, 2, 3))
    with pytest.raises(ValueError):
        solve_second_price(game(FP, NONE, 2, 3))


def test_solvers_need_a_canonical_game():
    analogue = build_discrete_analogue(ContinuousAuction.uniform_first_price(Fraction(4), 2), Fraction(1))
    with pytest.raises(ValueError):
        solve_symmetric(analogue.spec)
