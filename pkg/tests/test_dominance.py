"""
Tests for dominance reduction: the closed-form weak-dominance round,
iterated strict dominance and the selection helpers it is built on.
"""

from fractions import Fraction

import pytest

from analysis.continuum_bridge import ContinuousAuction, build_discrete_analogue
from analysis.known_patterns import known_se_patterns
from games.data_schemas import AuctionSpec, Structure, TieRule
from solvers.dominance import (
    all_selections,
    extreme_selections,
    highest_monotone,
    iterate_strict_dominance,
    lowest_monotone,
    monotone_count,
    monotone_selections,
    reduce_game,
    round1_weak_dominance,
    strategy_count,
    unreduced_strategy_count,
)
from solvers.result_schemas import ReducedGame

FP, SP, AP = Structure.FIRST_PRICE, Structure.SECOND_PRICE, Structure.ALL_PAY
FAIR, NONE = TieRule.FAIR_TIES, TieRule.NO_WINNER_ON_TIES


def game(structure, tie_rule, n, x):
    return AuctionSpec.canonical_game(structure, tie_rule, n, x)


# ----------------------------------------------------------------------
# Selection helpers


def test_monotone_count_matches_enumeration():
    row = ((0,), (0, 1), (0, 1, 2), (1, 3))
    selections = list(monotone_selections(row))
    assert monotone_count(row) == len(selections)
    assert all(list(s) == sorted(s) for s in selections)
    assert len(list(all_selections(row))) == 1 * 2 * 3 * 2


def test_monotone_count_zero_when_no_selection_exists():
    assert monotone_count(((2,), (0, 1))) == 0
    assert lowest_monotone(((2,), (0, 1))) is None
    assert extreme_selections(((2,), (0, 1))) is None


def test_extreme_selections_bracket_every_selection():
    row = ((0,), (0, 1), (0, 2), (1, 2, 3))
    low, high = extreme_selections(row)
    assert low == lowest_monotone(row) == (0, 0, 0, 1)
    assert high == highest_monotone(row) == (0, 1, 2, 3)
    for selection in monotone_selections(row):
        assert all(lo <= s <= hi for lo, s, hi in zip(low, selection, high))


# ----------------------------------------------------------------------
# Round 1


@pytest.mark.parametrize("tie_rule", [FAIR, NONE])
def test_round1_first_price_keeps_bids_below_value(tie_rule):
    reduced = round1_weak_dominance(game(FP, tie_rule, 2, 5))
    row = reduced.allowed[0]
    assert row[0] == (0,)
    assert row[1] == ((0,) if tie_rule == FAIR else (0, 1))
    for v in range(2, 6):
        assert row[v] == tuple(range(v))


@pytest.mark.parametrize("tie_rule", [FAIR, NONE])
def test_round1_all_pay_pins_low_values_to_zero(tie_rule):
    row = round1_weak_dominance(game(AP, tie_rule, 3, 4)).allowed[0]
    assert row[0] == row[1] == (0,)
    assert row[4] == (0, 1, 2, 3)


def test_round1_second_price():
    fair = round1_weak_dominance(game(SP, FAIR, 2, 3)).allowed[0]
    assert fair == ((0,), (1,), (2,), (3,))
    none = round1_weak_dominance(game(SP, NONE, 2, 3)).allowed[0]
    assert none == ((0, 1), (1, 2), (2, 3), (3,))


def test_round1_trace_lists_every_removed_bid():
    spec = game(FP, NONE, 3, 4)
    reduced = round1_weak_dominance(spec)
    kept = sum(len(bids) for bids in reduced.allowed[0])
    assert len(reduced.trace) == spec.n * (spec.values.S * spec.bids.S - kept)
    assert all(d.round == 1 for d in reduced.trace)
    assert reduced.is_symmetric


def test_round1_rejects_non_canonical_games():
    analogue = build_discrete_analogue(ContinuousAuction.uniform_first_price(Fraction(6), 2), Fraction(1))
    with pytest.raises(ValueError):
        round1_weak_dominance(analogue.spec)


# ----------------------------------------------------------------------
# Iterated strict dominance


def test_first_price_two_bidders_small_grid():
    spec = game(FP, NONE, 2, 2)
    round1 = round1_weak_dominance(spec)
    reduced = iterate_strict_dominance(spec, round1)

    assert reduced.allowed == (((0,), (0, 1), (1,)),) * 2
    strict = [d for d in reduced.trace if d.round >= 2]
    assert {(d.player, d.value, d.bid) for d in strict} == {(0, 2, 0), (1, 2, 0)}
    assert all(d.round == 2 and d.dominator == 1 for d in strict)

    assert unreduced_strategy_count(spec) == 27
    assert strategy_count(round1) == 4
    assert strategy_count(round1, monotone=True) == 3
    assert strategy_count(reduced) == 2


@pytest.mark.parametrize("tie_rule", [FAIR, NONE])
def test_second_price_has_no_strict_deletions(tie_rule):
    reduced = reduce_game(game(SP, tie_rule, 3, 4))
    assert all(d.round == 1 for d in reduced.trace)


@pytest.mark.parametrize("structure", [FP, AP])
@pytest.mark.parametrize("tie_rule", [FAIR, NONE])
@pytest.mark.parametrize("n,x", [(2, 4), (2, 7), (3, 5)])
def test_reduction_only_shrinks_round1_sets(structure, tie_rule, n, x):
    spec = game(structure, tie_rule, n, x)
    round1 = round1_weak_dominance(spec)
    reduced = iterate_strict_dominance(spec, round1)
    for before, after in zip(round1.allowed, reduced.allowed):
        for kept, left in zip(before, after):
            assert left
            assert set(left) <= set(kept)
    rounds = [d.round for d in reduced.trace]
    assert rounds == sorted(rounds)


@pytest.mark.parametrize("spec", [
    game(FP, NONE, 2, 8),
    game(FP, NONE, 3, 3),
    game(FP, NONE, 4, 4),
    game(FP, FAIR, 2, 9),
    game(AP, FAIR, 2, 2),
    game(AP, FAIR, 4, 2),
    game(AP, NONE, 2, 2),
])
def test_known_equilibria_survive_reduction(spec):
    patterns = known_se_patterns(spec)
    assert patterns
    for exact_budget in (None, 0):
        reduced = reduce_game(spec, exact_budget=exact_budget)
        for beta in patterns:
            for player in range(spec.n):
                for v, b in enumerate(beta.bid_of):
                    assert b in reduced.allowed[player][v]


def test_zero_exact_budget_downgrades_to_bounds():
    spec = game(FP, FAIR, 2, 6)
    reduced = reduce_game(spec, exact_budget=0)
    assert all(d.profile_count > d.budget for d in reduced.downgrades)
    round1 = round1_weak_dominance(spec)
    for kept, left in zip(round1.allowed[0], reduced.allowed[0]):
        assert left and set(left) <= set(kept)


def test_reduced_game_must_match_the_spec():
    spec = game(FP, NONE, 3, 2)
    two_players = round1_weak_dominance(game(FP, NONE, 2, 2))
    with pytest.raises(ValueError):
        iterate_strict_dominance(spec, two_players)


def test_empty_allowed_set_is_rejected():
    with pytest.raises(ValueError):
        ReducedGame(allowed=(((0,), ()),))
