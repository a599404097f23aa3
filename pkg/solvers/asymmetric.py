"""
Asymmetric first-price equilibrium for three bidders.
Builds the explicit profile whose bids track the continuous equilibrium
2v/3 in the first-price auction without ties, verifies it exactly, and
exports it as plotting data.
"""

import logging
from fractions import Fraction
from typing import Dict, List, Tuple

from pydantic import BaseModel, Field

from games.data_schemas import (
    AuctionSpec,
    BiddingFunction,
    Rational,
    StrategyProfile,
    Structure,
    TieRule,
)
from games.payoff_engine import is_equilibrium
from solvers import SolverInvariantError

logger = logging.getLogger(__name__)


def _bidder_rules(x: int) -> Tuple[Dict[int, int], Dict[int, int], Dict[int, int]]:
    first: Dict[int, int] = {}
    second: Dict[int, int] = {}
    third: Dict[int, int] = {}
    for m in range(3, x + 3, 3):
        level = 2 * m // 3
        first.update({m - 1: level - 1, m: level, m + 1: level + 1})
        second.update({m - 1: level, m: level, m + 1: level})
        third.update({m - 2: level - 1, m - 1: level - 1, m: level - 1})
    # small-value prefixes take precedence over the periodic rule
    first.update({0: 0, 1: 0})
    second.update({0: 0, 1: 0, 2: 1, 3: 2, 4: 2})
    third.update({0: 0, 1: 0, 2: 1, 3: 2})
    return first, second, third


def asymmetric_fp3_spec(x: int) -> AuctionSpec:
    return AuctionSpec.canonical_game(Structure.FIRST_PRICE, TieRule.NO_WINNER_ON_TIES, 3, x)


def construct_asymmetric_fp3(x: int) -> StrategyProfile:
    """
    Three-bidder first-price profile near 2v/3 when the number of values
    x + 1 is not a multiple of 3.

    For every multiple m of 3: bidder 1 bids 2m/3 - 1, 2m/3, 2m/3 + 1 at
    m - 1, m, m + 1; bidder 2 bids 2m/3 at all three; bidder 3 bids
    2m/3 - 1 at m - 2, m - 1, m. Each bidder has its own prefix for the
    lowest values.

    Args:
        x: Maximum value index (>= 4, with x + 1 not a multiple of 3)

    Returns:
        Verified StrategyProfile on the uniform canonical game

    Raises:
        ValueError: If x is out of range or x + 1 is a multiple of 3
        SolverInvariantError: If the built profile is not an equilibrium
    """
    if x < 4:
        raise ValueError(f"x must be at least 4, got {x}")
    if (x + 1) % 3 == 0:
        raise ValueError(f"the number of values x + 1 = {x + 1} must not be a multiple of 3")

    players = []
    for rule in _bidder_rules(x):
        players.append(BiddingFunction(bid_of=tuple(rule[v] for v in range(x + 1))))
    profile = StrategyProfile(players=tuple(players))

    check = is_equilibrium(asymmetric_fp3_spec(x), profile)
    if not check.is_equilibrium:
        raise SolverInvariantError(f"asymmetric construction fails at x={x}: {check.witness}")
    logger.info(f"✓ Asymmetric three-bidder profile verified for x={x}")
    return profile


class AsymmetricRow(BaseModel):
    """One value of the asymmetric profile next to the continuous benchmark."""

    value: int = Field(..., ge=0)
    bids: Tuple[int, ...] = Field(..., description="Bid index of each bidder")
    reference: Rational = Field(..., description="Continuous equilibrium bid 2v/3")

    def max_distance(self) -> Fraction:
        return max(abs(b - self.reference) for b in self.bids)


def export_figure1_data(profile: StrategyProfile) -> List[AsymmetricRow]:
    """
    Tabulate a profile against the line 2v/3.

    Args:
        profile: Strategy profile (one function per bidder)

    Returns:
        One row per value index
    """
    size = len(profile.players[0])
    return [
        AsymmetricRow(
            value=v,
            bids=tuple(beta[v] for beta in profile.players),
            reference=Fraction(2 * v, 3),
        )
        for v in range(size)
    ]
