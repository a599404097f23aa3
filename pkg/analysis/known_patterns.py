"""
Known symmetric equilibria.
Bidding functions that closed-form results predict for recognised
(structure, tie rule, n, x) classes. Used as an oracle against solver
output; an empty list means no prediction, not non-existence.
"""

import logging
from typing import List

from analysis.thresholds import FairTiesClass, fair_ties_class, prop3_predicate
from games.data_schemas import AuctionSpec, BiddingFunction, Structure, TieRule

logger = logging.getLogger(__name__)

# Largest n for which the all-pay fair-ties x = 2 pattern (0, 0, 1) is an
# equilibrium: the top type prefers bid 1 to bid 0 only while 6 - 9·(2/3)^n >= n.
ALL_PAY_X2_FAIR_MAX_N = 4


def floor_half(size: int) -> BiddingFunction:
    return BiddingFunction.from_rule(size, lambda v: v // 2)


def ceil_half(size: int) -> BiddingFunction:
    return BiddingFunction.from_rule(size, lambda v: (v + 1) // 2)


def stepped_two_thirds(size: int) -> BiddingFunction:
    """β(3k) = β(3k+1) = 2k, β(3k+2) = 2k + 1."""
    return BiddingFunction.from_rule(size, lambda v: 2 * (v // 3) + (1 if v % 3 == 2 else 0))


def value_minus_one(size: int) -> BiddingFunction:
    """β(0) = 0 and β(v) = v - 1 otherwise."""
    return BiddingFunction.from_rule(size, lambda v: max(v - 1, 0))


def known_se_patterns(spec: AuctionSpec) -> List[BiddingFunction]:
    """
    Symmetric equilibria predicted in closed form for this game.

    Only uniform canonical first-price and all-pay games are recognised.

    Args:
        spec: Game description

    Returns:
        Predicted bidding functions, sorted; empty when nothing applies
    """
    if not spec.canonical or not spec.distribution.is_uniform:
        return []
    n, x, S = spec.n, spec.x, spec.values.S
    fair = spec.tie_rule == TieRule.FAIR_TIES
    patterns: List[BiddingFunction] = []

    if spec.structure == Structure.FIRST_PRICE:
        if not fair:
            if n == 2:
                patterns = [floor_half(S), ceil_half(S)]
            elif x >= 1 and not prop3_predicate(n, x):
                patterns = [value_minus_one(S)]
        else:
            category = fair_ties_class(n, x)
            if category == FairTiesClass.N2_ODD_SE:
                patterns = [floor_half(S)]
            elif category == FairTiesClass.N3_OTHER_SE:
                patterns = [stepped_two_thirds(S)]

    elif spec.structure == Structure.ALL_PAY and x == 2:
        if (fair and n <= ALL_PAY_X2_FAIR_MAX_N) or (not fair and n == 2):
            patterns = [BiddingFunction(bid_of=(0, 0, 1))]
        if fair and n == 2:
            # the top type is indifferent between 0 (half the prize) and 1
            patterns.append(BiddingFunction(bid_of=(0, 0, 0)))

    unique = sorted({beta.bid_of for beta in patterns})
    return [BiddingFunction(bid_of=bid_of) for bid_of in unique]
