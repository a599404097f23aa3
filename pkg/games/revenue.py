"""
Expected seller revenue.
Computes the exact expected revenue of a strategy profile, either by a
dynamic program over the players' bid distributions or by brute force
over the joint value outcome space.
"""

import itertools
import logging
import math
from fractions import Fraction
from typing import List, Sequence

from games.data_schemas import AuctionSpec, StrategyProfile, Structure, TieRule
from solvers import SolverInvariantError

logger = logging.getLogger(__name__)


class RevenueCalculator:
    """Revenue of a profile in one game, by DP or joint-outcome brute force."""

    # Outcome-space size up to which 'auto' cross-checks with brute force
    AUTO_BRUTE_FORCE_LIMIT = 4096
    # Hard limit for an explicit brute-force request
    BRUTE_FORCE_LIMIT = 10 ** 6

    def __init__(self, spec: AuctionSpec, profile: StrategyProfile):
        spec.check_profile(profile)
        self.spec = spec
        self.profile = profile
        self.amounts = spec.bids.amounts()
        self.pmfs = self._bid_pmfs()
        self.cdfs = [list(itertools.accumulate(pmf)) for pmf in self.pmfs]

    def _bid_pmfs(self) -> List[List[Fraction]]:
        pmfs = []
        for beta in self.profile.players:
            pmf = [Fraction(0)] * self.spec.bids.S
            for v, b in enumerate(beta.bid_of):
                pmf[b] += self.spec.pmf[v]
            pmfs.append(pmf)
        return pmfs

    @property
    def outcome_count(self) -> int:
        return self.spec.values.S ** self.spec.n

    def cdf(self, player: int, c: int) -> Fraction:
        """P(b_player <= c); zero below the grid."""
        if c < 0:
            return Fraction(0)
        return self.cdfs[player][c]

    def others_at_most(self, player: int, c: int) -> Fraction:
        return math.prod((self.cdf(j, c) for j in range(self.spec.n) if j != player), start=Fraction(1))

    def all_at_most(self, c: int) -> Fraction:
        return math.prod((self.cdf(j, c) for j in range(self.spec.n)), start=Fraction(1))

    # ------------------------------------------------------------------

    def by_dp(self) -> Fraction:
        """Exact revenue from the bid distributions."""
        spec = self.spec
        B = spec.bids.S
        n = spec.n
        revenue = Fraction(0)

        if spec.structure == Structure.ALL_PAY:
            for pmf in self.pmfs:
                revenue += sum((self.amounts[b] * pmf[b] for b in range(B)), Fraction(0))
            return revenue

        if spec.structure == Structure.FIRST_PRICE:
            if spec.tie_rule == TieRule.FAIR_TIES:
                # some bidder wins at the top bid b
                for b in range(B):
                    revenue += self.amounts[b] * (self.all_at_most(b) - self.all_at_most(b - 1))
            else:
                # exactly one bidder at b and everybody else strictly below
                for b in range(B):
                    unique_top = sum((self.pmfs[i][b] * self.others_at_most(i, b - 1) for i in range(n)),
                                     Fraction(0))
                    revenue += self.amounts[b] * unique_top
            return revenue

        if spec.tie_rule == TieRule.FAIR_TIES:
            # price is the second-highest bid (the top bid itself when tied)
            previous = Fraction(0)
            for c in range(B):
                at_most_one_above = self.all_at_most(c) + sum(
                    ((1 - self.cdf(i, c)) * self.others_at_most(i, c) for i in range(n)), Fraction(0)
                )
                revenue += self.amounts[c] * (at_most_one_above - previous)
                previous = at_most_one_above
            return revenue

        # unique winner at b pays the highest opponent bid c < b
        for i in range(n):
            for b in range(1, B):
                if not self.pmfs[i][b]:
                    continue
                expected_price = sum(
                    (self.amounts[c] * (self.others_at_most(i, c) - self.others_at_most(i, c - 1))
                     for c in range(b)),
                    Fraction(0),
                )
                revenue += self.pmfs[i][b] * expected_price
        return revenue

    def by_brute_force(self) -> Fraction:
        """Exact revenue by summing over every joint value outcome."""
        if self.outcome_count > self.BRUTE_FORCE_LIMIT:
            raise ValueError(
                f"brute-force revenue needs {self.outcome_count} outcomes, limit is {self.BRUTE_FORCE_LIMIT}"
            )
        spec = self.spec
        revenue = Fraction(0)
        players = self.profile.players
        for values in itertools.product(range(spec.values.S), repeat=spec.n):
            probability = math.prod((spec.pmf[v] for v in values), start=Fraction(1))
            bids = [players[i].bid_of[v] for i, v in enumerate(values)]
            revenue += probability * self._outcome_revenue(bids)
        return revenue

    def _outcome_revenue(self, bids: Sequence[int]) -> Fraction:
        spec = self.spec
        if spec.structure == Structure.ALL_PAY:
            return sum((self.amounts[b] for b in bids), Fraction(0))
        top = max(bids)
        top_count = bids.count(top)
        if top_count > 1 and spec.tie_rule == TieRule.NO_WINNER_ON_TIES:
            return Fraction(0)
        if spec.structure == Structure.FIRST_PRICE:
            return self.amounts[top]
        second = sorted(bids)[-2]
        return self.amounts[second]


def expected_revenue(spec: AuctionSpec, profile: StrategyProfile, method: str = 'auto') -> Fraction:
    """
    Expected revenue of a profile.

    Args:
        spec: Game description
        profile: Strategy profile
        method: 'dp', 'brute' or 'auto' (DP, cross-checked by brute force
            when the outcome space is small)

    Returns:
        Exact expected revenue in currency units
    """
    calculator = RevenueCalculator(spec, profile)
    if method == 'dp':
        return calculator.by_dp()
    if method == 'brute':
        return calculator.by_brute_force()
    if method != 'auto':
        raise ValueError(f"unknown revenue method: {method!r}")

    revenue = calculator.by_dp()
    if calculator.outcome_count <= calculator.AUTO_BRUTE_FORCE_LIMIT:
        brute = calculator.by_brute_force()
        if brute != revenue:
            raise SolverInvariantError(
                f"revenue DP {revenue} disagrees with brute force {brute} for {spec.label()}"
            )
        logger.debug(f"Revenue {revenue} confirmed over {calculator.outcome_count} outcomes")
    return revenue
