"""
Exact payoff engine for discrete auction games.

Two paths compute the same quantities:
- the Fraction path (module-level functions taking per-opponent bid pmfs)
  is the reference definition used by tests and one-off queries;
- PayoffEngine multiplies every probability through by a common integer
  scale so that search code compares plain ints.
"""

import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

from games.data_schemas import (
    AuctionSpec,
    DeviationWitness,
    EquilibriumCheck,
    StrategyProfile,
    Structure,
    TieRule,
)

logger = logging.getLogger(__name__)


def tie_polynomial(lows: Sequence, equals: Sequence) -> list:
    """
    Coefficients of Π_j (low_j + equal_j·t).

    Coefficient k is the (scaled) probability that exactly k opponents tie
    at the bid and every other opponent bids strictly below it.

    Args:
        lows: Per-opponent mass strictly below the bid
        equals: Per-opponent mass exactly at the bid

    Returns:
        List of n_opponents + 1 coefficients (ints or Fractions)
    """
    coefficients = [1]
    for low, equal in zip(lows, equals):
        shifted = [0] * (len(coefficients) + 1)
        for k, c in enumerate(coefficients):
            if c:
                shifted[k] += c * low
                shifted[k + 1] += c * equal
        coefficients = shifted
    return coefficients


def opponent_bid_pmf(spec: AuctionSpec, profile: StrategyProfile, player: int) -> List[List[Fraction]]:
    """
    Push the value pmf through each opponent's bidding function.

    Args:
        spec: Game description
        profile: Strategy profile
        player: Index of the player whose opponents are wanted

    Returns:
        One pmf over bid indices per opponent, in player order
    """
    pmfs = []
    for j, beta in enumerate(profile.players):
        if j == player:
            continue
        pmf = [Fraction(0)] * spec.bids.S
        for v, b in enumerate(beta.bid_of):
            pmf[b] += spec.pmf[v]
        pmfs.append(pmf)
    return pmfs


def _below(pmf: Sequence[Fraction], b: int) -> Fraction:
    return sum(pmf[:b], Fraction(0))


def win_probability(b: int, opp_pmfs: Sequence[Sequence[Fraction]], tie_rule: TieRule) -> Fraction:
    """
    Probability that a bid of index b wins.

    NoWinnerOnTies: every opponent bids strictly lower.
    FairTies: with k opponents tied at b and none above, win with 1/(k+1).
    """
    lows = [_below(pmf, b) for pmf in opp_pmfs]
    if tie_rule == TieRule.NO_WINNER_ON_TIES:
        return math.prod(lows, start=Fraction(1))
    equals = [pmf[b] for pmf in opp_pmfs]
    coefficients = tie_polynomial(lows, equals)
    return sum((Fraction(c) / (k + 1) for k, c in enumerate(coefficients)), Fraction(0))


def expected_payment_if_win(spec: AuctionSpec, b: int, opp_pmfs: Sequence[Sequence[Fraction]]) -> Fraction:
    """
    Second-price expected payment, weighted by the winning probability.

    A unique winner pays the highest opponent bid; a fair-ties winner pays
    the shared top bid.
    """
    def all_at_most(c: int) -> Fraction:
        return math.prod((_below(pmf, c + 1) for pmf in opp_pmfs), start=Fraction(1))

    payment = Fraction(0)
    for c in range(b):
        payment += spec.bids.amount(c) * (all_at_most(c) - (all_at_most(c - 1) if c > 0 else 0))
    if spec.tie_rule == TieRule.FAIR_TIES:
        strictly_below = all_at_most(b - 1) if b > 0 else Fraction(0)
        payment += spec.bids.amount(b) * (win_probability(b, opp_pmfs, spec.tie_rule) - strictly_below)
    return payment


def interim_payoff(spec: AuctionSpec, v: int, b: int, opp_pmfs: Sequence[Sequence[Fraction]]) -> Fraction:
    """
    Expected payoff of a bidder with value index v who bids index b.

    Args:
        spec: Game description
        v: Value index
        b: Bid index
        opp_pmfs: Per-opponent bid pmfs

    Returns:
        Exact payoff in currency units
    """
    value = spec.values.amount(v)
    bid = spec.bids.amount(b)
    win = win_probability(b, opp_pmfs, spec.tie_rule)
    if spec.structure == Structure.FIRST_PRICE:
        return (value - bid) * win
    if spec.structure == Structure.ALL_PAY:
        return value * win - bid
    return value * win - expected_payment_if_win(spec, b, opp_pmfs)


def best_response_set(spec: AuctionSpec, player: int, v: int,
                      opp_pmfs: Sequence[Sequence[Fraction]]) -> Tuple[int, ...]:
    """
    Bids attaining the maximum interim payoff at value v.

    The player index is carried for symmetry with the profile-based API;
    the payoff only depends on the opponents' pmfs.
    """
    payoffs = [interim_payoff(spec, v, b, opp_pmfs) for b in range(spec.bids.S)]
    best = max(payoffs)
    return tuple(b for b, p in enumerate(payoffs) if p == best)


class BidTable:
    """Per-bid win and payment units against one fixed set of opponents."""

    __slots__ = ('win', 'pay')

    def __init__(self, win: List[int], pay: Optional[List[int]]):
        self.win = win
        self.pay = pay


class PayoffEngine:
    """
    Integer-scaled payoff evaluation for one AuctionSpec.

    Value weights share the denominator D, amounts share the denominator A
    and the fair-ties shares 1/(k+1) share lcm(1..n). A win probability W
    is stored as W·D^(n-1)·lcm and a payoff u as u·A·D^(n-1)·lcm, so all
    comparisons within one game are integer comparisons.
    """

    def __init__(self, spec: AuctionSpec):
        self.spec = spec
        self.n = spec.n
        self.S = spec.values.S
        self.B = spec.bids.S
        self.structure = spec.structure
        self.fair = spec.tie_rule == TieRule.FAIR_TIES

        self.D = math.lcm(*(p.denominator for p in spec.pmf))
        self.weights = tuple(int(p * self.D) for p in spec.pmf)

        value_amounts = spec.values.amounts()
        bid_amounts = spec.bids.amounts()
        self.A = math.lcm(*(a.denominator for a in value_amounts + bid_amounts))
        self.value_units = tuple(int(a * self.A) for a in value_amounts)
        self.bid_units = tuple(int(a * self.A) for a in bid_amounts)

        self.tie_lcm = math.lcm(*range(1, self.n + 1))
        self.tie_shares = tuple(self.tie_lcm // (k + 1) for k in range(self.n))
        self.prob_scale = self.D ** (self.n - 1) * self.tie_lcm
        self.scale = self.A * self.prob_scale
        logger.debug(f"Payoff engine for {spec.label()}: payoff scale {self.scale}")

    # ------------------------------------------------------------------
    # Opponent distributions

    def bid_weights(self, beta: Sequence[int]) -> Tuple[int, ...]:
        """Integer bid weights (summing to D) induced by a bidding function."""
        weights = [0] * self.B
        for v, b in enumerate(beta):
            weights[b] += self.weights[v]
        return tuple(weights)

    def bid_table(self, opponents: Sequence[Sequence[int]]) -> BidTable:
        """
        Win (and, for second price, payment) units for every bid index.

        Args:
            opponents: Integer bid weights of each of the n-1 opponents

        Returns:
            BidTable with win[b] = W(b)·D^(n-1)·lcm
        """
        B = self.B
        cumulative = []
        for weights in opponents:
            running = 0
            cdf = []
            for w in weights:
                running += w
                cdf.append(running)
            cumulative.append(cdf)

        # all_below[b] = Π_j P(b_j < b), scaled by D^(n-1)
        all_below = [0] * (B + 1)
        for b in range(B + 1):
            product = 1
            for cdf in cumulative:
                product *= cdf[b - 1] if b > 0 else 0
                if not product:
                    break
            all_below[b] = product

        win = [0] * B
        for b in range(B):
            if not self.fair:
                win[b] = all_below[b] * self.tie_lcm
                continue
            lows = [cdf[b - 1] if b > 0 else 0 for cdf in cumulative]
            equals = [weights[b] for weights in opponents]
            coefficients = tie_polynomial(lows, equals)
            win[b] = sum(c * self.tie_shares[k] for k, c in enumerate(coefficients))

        pay = None
        if self.structure == Structure.SECOND_PRICE:
            pay = [0] * B
            running = 0
            for b in range(B):
                # unique-winner part: highest opponent bid c < b
                tie_part = win[b] - all_below[b] * self.tie_lcm
                pay[b] = running + self.bid_units[b] * tie_part
                running += self.bid_units[b] * (all_below[b + 1] - all_below[b]) * self.tie_lcm
        return BidTable(win, pay)

    # ------------------------------------------------------------------
    # Payoffs

    def payoff_units(self, v: int, b: int, table: BidTable) -> int:
        value = self.value_units[v]
        if self.structure == Structure.FIRST_PRICE:
            return (value - self.bid_units[b]) * table.win[b]
        if self.structure == Structure.ALL_PAY:
            return value * table.win[b] - self.bid_units[b] * self.prob_scale
        return value * table.win[b] - table.pay[b]

    def payoff_row(self, v: int, table: BidTable) -> List[int]:
        return [self.payoff_units(v, b, table) for b in range(self.B)]

    def to_currency(self, units: int) -> Fraction:
        return Fraction(units, self.scale)

    def best_responses(self, table: BidTable) -> List[Tuple[int, ...]]:
        """Argmax bid set at every value index."""
        result = []
        for v in range(self.S):
            row = self.payoff_row(v, table)
            best = max(row)
            result.append(tuple(b for b, u in enumerate(row) if u == best))
        return result

    def first_improvement(self, v: int, b: int, table: BidTable) -> Optional[Tuple[int, int]]:
        """First bid (ascending) strictly better than b at value v, with the unit gain."""
        current = self.payoff_units(v, b, table)
        for deviation in range(self.B):
            gain = self.payoff_units(v, deviation, table) - current
            if gain > 0:
                return deviation, gain
        return None

    def opponents_of(self, bid_weights: Sequence[Sequence[int]], player: int) -> List[Sequence[int]]:
        return [w for j, w in enumerate(bid_weights) if j != player]

    def check_player(self, player: int, profile_weights: Sequence[Sequence[int]],
                     beta: Sequence[int]) -> Optional[DeviationWitness]:
        """Witness for one player's first profitable deviation, or None."""
        table = self.bid_table(self.opponents_of(profile_weights, player))
        for v, b in enumerate(beta):
            improvement = self.first_improvement(v, b, table)
            if improvement is not None:
                deviation, gain = improvement
                return DeviationWitness(player=player, value=v, bid=b, deviation=deviation,
                                        gain=self.to_currency(gain))
        return None

    def check_profile(self, bids: Sequence[Sequence[int]]) -> EquilibriumCheck:
        """Equilibrium test on raw bid tuples (one per player)."""
        weights = [self.bid_weights(beta) for beta in bids]
        if all(beta == bids[0] for beta in bids):
            # symmetric profile: every player faces the same opponents
            witness = self.check_player(0, weights, bids[0])
            return EquilibriumCheck(is_equilibrium=witness is None, witness=witness)
        for player, beta in enumerate(bids):
            witness = self.check_player(player, weights, beta)
            if witness is not None:
                return EquilibriumCheck(is_equilibrium=False, witness=witness)
        return EquilibriumCheck(is_equilibrium=True)


@lru_cache(maxsize=128)
def engine_for(spec: AuctionSpec) -> PayoffEngine:
    """Cached PayoffEngine per game."""
    return PayoffEngine(spec)


def is_equilibrium(spec: AuctionSpec, profile: StrategyProfile) -> EquilibriumCheck:
    """
    Test whether every player's bid is a best response at every value.

    Args:
        spec: Game description
        profile: Strategy profile to check

    Returns:
        EquilibriumCheck; on failure the witness is the first strict
        improvement in (player, value, deviating bid) ascending order
    """
    spec.check_profile(profile)
    return engine_for(spec).check_profile([beta.bid_of for beta in profile.players])
