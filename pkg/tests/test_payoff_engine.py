"""
Tests for the exact payoff engine.
Checks the Fraction reference path on hand-computed cases and
cross-checks the integer-scaled PayoffEngine against it.
"""

import random
from fractions import Fraction

import pytest

from analysis.known_patterns import floor_half
from analysis.thresholds import s_closed_form
from games.data_schemas import AuctionSpec, BiddingFunction, StrategyProfile, Structure, TieRule
from games.payoff_engine import (
    PayoffEngine,
    best_response_set,
    interim_payoff,
    is_equilibrium,
    opponent_bid_pmf,
    tie_polynomial,
    win_probability,
)

FP, SP, AP = Structure.FIRST_PRICE, Structure.SECOND_PRICE, Structure.ALL_PAY
FAIR, NONE = TieRule.FAIR_TIES, TieRule.NO_WINNER_ON_TIES


def game(structure, tie_rule, n, x, delta=1, pmf=None):
    return AuctionSpec.canonical_game(structure, tie_rule, n, x, delta=Fraction(delta), pmf=pmf)


def symmetric(bids, n):
    return StrategyProfile.symmetric(BiddingFunction(bid_of=tuple(bids)), n)


def random_monotone(rng, size, top):
    bids = sorted(rng.randint(0, top) for _ in range(size))
    return BiddingFunction(bid_of=tuple(bids))


# ----------------------------------------------------------------------
# opponent_bid_pmf


def test_opponent_pmf_uniform_three_values():
    spec = game(FP, NONE, 2, 2)
    pmfs = opponent_bid_pmf(spec, symmetric((0, 0, 1), 2), player=0)
    assert pmfs == [[Fraction(2, 3), Fraction(1, 3), Fraction(0)]]


def test_opponent_pmf_constant_zero():
    spec = game(AP, FAIR, 3, 4)
    pmfs = opponent_bid_pmf(spec, symmetric((0,) * 5, 3), player=1)
    assert len(pmfs) == 2
    for pmf in pmfs:
        assert pmf == [1, 0, 0, 0, 0]


def test_opponent_pmf_floor_half():
    spec = game(FP, NONE, 2, 10)
    pmf = opponent_bid_pmf(spec, StrategyProfile.symmetric(floor_half(11), 2), player=0)[0]
    assert pmf[:6] == [Fraction(2, 11)] * 5 + [Fraction(1, 11)]
    assert sum(pmf) == 1
    assert all(p == 0 for p in pmf[6:])


# ----------------------------------------------------------------------
# win_probability


def test_fair_tie_two_bidders_is_a_coin_flip():
    assert win_probability(1, [[0, 1, 0]], FAIR) == Fraction(1, 2)


def test_fair_tie_three_bidders():
    assert win_probability(2, [[0, 0, 1], [0, 0, 1]], FAIR) == Fraction(1, 3)


def test_fair_ties_match_closed_form():
    p = Fraction(1, 5)
    opponents = [[1 - p, p]] * 3
    assert win_probability(1, opponents, FAIR) == Fraction(369, 500)
    assert win_probability(1, opponents, FAIR) == s_closed_form(4, p)


@pytest.mark.parametrize("n", [2, 3, 5, 8])
@pytest.mark.parametrize("p", [Fraction(1, 2), Fraction(1, 7), Fraction(5, 6)])
def test_fair_ties_match_closed_form_grid(n, p):
    assert win_probability(1, [[1 - p, p]] * (n - 1), FAIR) == s_closed_form(n, p)


def test_no_winner_on_ties_needs_strictly_higher_bid():
    assert win_probability(1, [[Fraction(1, 4), Fraction(3, 4)]], NONE) == Fraction(1, 4)
    assert win_probability(0, [[Fraction(1, 2), Fraction(1, 2)]], NONE) == 0


def test_tie_polynomial_counts_ties():
    # two opponents, each below w.p. 1/2 and tied w.p. 1/2
    half = Fraction(1, 2)
    assert tie_polynomial([half, half], [half, half]) == [Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)]


@pytest.mark.parametrize("tie_rule", [FAIR, NONE])
def test_win_probability_non_decreasing_in_bid(tie_rule):
    rng = random.Random(7)
    spec = game(FP, tie_rule, 3, 6)
    for _ in range(5):
        profile = StrategyProfile(players=tuple(random_monotone(rng, 7, 6) for _ in range(3)))
        pmfs = opponent_bid_pmf(spec, profile, 0)
        wins = [win_probability(b, pmfs, tie_rule) for b in range(7)]
        assert wins == sorted(wins)


# ----------------------------------------------------------------------
# interim_payoff


def test_first_price_plug_in():
    spec = game(FP, NONE, 2, 5)
    opponent = [Fraction(1, 5), Fraction(2, 5), 0, Fraction(2, 5), 0, 0]
    assert interim_payoff(spec, 4, 2, [opponent]) == Fraction(6, 5)


def test_all_pay_zero_bid_without_ties_pays_nothing():
    spec = game(AP, NONE, 3, 3)
    opponents = [[Fraction(1, 2), Fraction(1, 2), 0, 0]] * 2
    assert interim_payoff(spec, 0, 0, opponents) == 0


def test_second_price_fair_tie_at_top_value():
    spec = game(SP, FAIR, 2, 3)
    assert interim_payoff(spec, 3, 3, [[0, 0, 0, 1]]) == 0


def test_payoff_scales_linearly_with_delta():
    rng = random.Random(3)
    for structure in (FP, SP, AP):
        base = game(structure, FAIR, 3, 4)
        profile = StrategyProfile(players=tuple(random_monotone(rng, 5, 4) for _ in range(3)))
        pmfs = opponent_bid_pmf(base, profile, 1)
        for delta in (Fraction(1, 100), Fraction(7, 3)):
            scaled = base.with_delta(delta)
            for v in range(5):
                for b in range(5):
                    assert interim_payoff(scaled, v, b, pmfs) == delta * interim_payoff(base, v, b, pmfs)


def test_even_top_value_gains_by_shading_below_half():
    # with ties, two bidders: against floor(v/2) the top type prefers x/2 - 1 to x/2
    for x in (6, 8, 10, 12):
        spec = game(FP, FAIR, 2, x)
        pmfs = opponent_bid_pmf(spec, StrategyProfile.symmetric(floor_half(x + 1), 2), 0)
        assert interim_payoff(spec, x, x // 2 - 1, pmfs) > interim_payoff(spec, x, x // 2, pmfs)


# ----------------------------------------------------------------------
# is_equilibrium and best responses


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("tie_rule", [FAIR, NONE])
def test_truthful_second_price_is_an_equilibrium(n, tie_rule):
    spec = game(SP, tie_rule, n, 4)
    assert is_equilibrium(spec, symmetric(range(5), n)).is_equilibrium


def test_floor_half_first_price_two_bidders():
    spec = game(FP, NONE, 2, 10)
    assert is_equilibrium(spec, StrategyProfile.symmetric(floor_half(11), 2))


def test_floor_half_all_pay_fails_with_witness():
    spec = game(AP, FAIR, 2, 10)
    check = is_equilibrium(spec, StrategyProfile.symmetric(floor_half(11), 2))
    assert not check.is_equilibrium
    witness = check.witness
    assert witness is not None
    assert witness.gain > 0
    pmfs = opponent_bid_pmf(spec, StrategyProfile.symmetric(floor_half(11), 2), witness.player)
    assert (interim_payoff(spec, witness.value, witness.deviation, pmfs)
            - interim_payoff(spec, witness.value, witness.bid, pmfs)) == witness.gain


def test_profile_size_mismatch_is_rejected():
    spec = game(FP, NONE, 3, 2)
    with pytest.raises(ValueError):
        is_equilibrium(spec, symmetric((0, 0, 1), 2))
    with pytest.raises(ValueError):
        is_equilibrium(spec, symmetric((0, 0, 3), 3))


def test_zero_value_best_response_contains_zero():
    spec = game(FP, NONE, 3, 5)
    rng = random.Random(11)
    profile = StrategyProfile(players=tuple(random_monotone(rng, 6, 5) for _ in range(3)))
    assert 0 in best_response_set(spec, 0, 0, opponent_bid_pmf(spec, profile, 0))


@pytest.mark.parametrize("v", [1, 3, 5, 7, 9])
def test_odd_values_are_indifferent_against_floor_half(v):
    spec = game(FP, NONE, 2, 10)
    pmfs = opponent_bid_pmf(spec, StrategyProfile.symmetric(floor_half(11), 2), 0)
    argmax = best_response_set(spec, 0, v, pmfs)
    assert v // 2 in argmax
    assert v // 2 + 1 in argmax


def test_two_bid_game_singleton_best_response():
    # x = 1, opponent always bids 0: the high type earns nothing at either bid
    spec = game(FP, NONE, 2, 1)
    pmfs = [[Fraction(1), Fraction(0)]]
    assert best_response_set(spec, 0, 1, pmfs) == (0, 1)
    spec = game(AP, NONE, 2, 1, pmf=(Fraction(1, 4), Fraction(3, 4)))
    # winning at 1 pays 1 for sure and gains 1 only when the opponent bids 0
    assert best_response_set(spec, 0, 1, [[Fraction(1, 4), Fraction(3, 4)]]) == (0,)


# ----------------------------------------------------------------------
# δ-invariance and the integer engine


@pytest.mark.parametrize("structure", [FP, SP, AP])
@pytest.mark.parametrize("tie_rule", [FAIR, NONE])
def test_equilibrium_verdict_does_not_depend_on_delta(structure, tie_rule):
    rng = random.Random(f"{structure.value}-{tie_rule.value}")
    base = game(structure, tie_rule, 2, 5)
    candidates = [floor_half(6), BiddingFunction(bid_of=tuple(range(6)))]
    candidates += [random_monotone(rng, 6, 5) for _ in range(6)]
    for beta in candidates:
        profile = StrategyProfile.symmetric(beta, 2)
        verdicts = {
            is_equilibrium(base.with_delta(delta), profile).is_equilibrium
            for delta in (Fraction(1), Fraction(1, 100), Fraction(7, 3))
        }
        assert len(verdicts) == 1


@pytest.mark.parametrize("structure", [FP, SP, AP])
@pytest.mark.parametrize("tie_rule", [FAIR, NONE])
@pytest.mark.parametrize("n", [2, 3, 4])
def test_integer_engine_matches_fraction_path(structure, tie_rule, n):
    rng = random.Random(n * 31 + len(structure.value) + len(tie_rule.value))
    pmf = (Fraction(1, 10), Fraction(3, 10), Fraction(1, 5), Fraction(1, 4), Fraction(3, 20))
    spec = game(structure, tie_rule, n, 4, delta=Fraction(3, 7), pmf=pmf)
    engine = PayoffEngine(spec)
    profile = StrategyProfile(players=tuple(random_monotone(rng, 5, 4) for _ in range(n)))
    weights = [engine.bid_weights(beta.bid_of) for beta in profile.players]
    for player in range(n):
        table = engine.bid_table(engine.opponents_of(weights, player))
        pmfs = opponent_bid_pmf(spec, profile, player)
        for v in range(5):
            for b in range(5):
                assert engine.to_currency(engine.payoff_units(v, b, table)) == interim_payoff(spec, v, b, pmfs)


def test_engine_witness_is_a_strict_improvement():
    spec = game(AP, NONE, 3, 4)
    profile = symmetric((0, 1, 2, 3, 4), 3)
    check = is_equilibrium(spec, profile)
    assert not check
    pmfs = opponent_bid_pmf(spec, profile, check.witness.player)
    w = check.witness
    assert interim_payoff(spec, w.value, w.deviation, pmfs) - interim_payoff(spec, w.value, w.bid, pmfs) == w.gain
