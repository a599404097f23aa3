"""
Dominance reduction.
Round 1 removes the weakly dominated bids identified in closed form;
later rounds iterate strict dominance by pure bids, certified against
every monotone opponent profile that survives so far.
"""

import itertools
import logging
import math
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from games.data_schemas import AuctionSpec, Structure, TieRule
from games.payoff_engine import BidTable, PayoffEngine, engine_for
from solvers.result_schemas import Deletion, ReducedGame, TierDowngrade

logger = logging.getLogger(__name__)

Row = Tuple[Tuple[int, ...], ...]


# ----------------------------------------------------------------------
# Monotone selections from per-value bid sets

def monotone_count(row: Row) -> int:
    """Number of non-decreasing selections β(v) ∈ row[v]."""
    if not row:
        return 0
    # counts[b]: selections of the prefix that end at bid b
    counts = {b: 1 for b in row[0]}
    for allowed in row[1:]:
        counts = {
            b: total for b in allowed
            if (total := sum(c for previous, c in counts.items() if previous <= b))
        }
        if not counts:
            return 0
    return sum(counts.values())


def monotone_selections(row: Row) -> Iterator[Tuple[int, ...]]:
    """All non-decreasing selections from row, in lexicographic order."""
    S = len(row)
    current: List[int] = []

    def extend(v: int, floor: int) -> Iterator[Tuple[int, ...]]:
        if v == S:
            yield tuple(current)
            return
        for b in row[v]:
            if b < floor:
                continue
            current.append(b)
            yield from extend(v + 1, b)
            current.pop()

    yield from extend(0, 0)


def all_selections(row: Row) -> Iterator[Tuple[int, ...]]:
    """Every selection from row (monotone or not), lexicographic."""
    return itertools.product(*row)


def lowest_monotone(row: Row) -> Optional[Tuple[int, ...]]:
    """Pointwise-smallest monotone selection, or None when none exists."""
    result = []
    floor = 0
    for allowed in row:
        candidates = [b for b in allowed if b >= floor]
        if not candidates:
            return None
        floor = candidates[0]
        result.append(floor)
    return tuple(result)


def highest_monotone(row: Row) -> Optional[Tuple[int, ...]]:
    """Pointwise-largest monotone selection, or None when none exists."""
    result = []
    ceiling = None
    for allowed in reversed(row):
        candidates = [b for b in allowed if ceiling is None or b <= ceiling]
        if not candidates:
            return None
        ceiling = candidates[-1]
        result.append(ceiling)
    return tuple(reversed(result))


def extreme_selections(row: Row, monotone: bool = True) -> Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """
    (pointwise-lowest, pointwise-highest) bidding functions consistent with row.

    A lower bidding function puts more mass on low bids, so its CDF is
    pointwise larger. Win probabilities are non-decreasing in every
    opponent's CDF, which makes these two the extreme opponents.
    """
    if not monotone:
        return tuple(s[0] for s in row), tuple(s[-1] for s in row)
    low = lowest_monotone(row)
    high = highest_monotone(row)
    if low is None or high is None:
        return None
    return low, high


# ----------------------------------------------------------------------
# Payoff bounds

class PayoffBounds:
    """
    Lower and upper payoff units at every (value, bid) for one player.

    Opponents are either fixed (exact bid weights) or bounded by their
    extreme selections. Only first price and all-pay admit these bounds:
    the second-price payment moves in both directions with the CDFs.
    """

    def __init__(self, engine: PayoffEngine, table_low: BidTable, table_high: BidTable):
        self.engine = engine
        self.table_low = table_low
        self.table_high = table_high

    @classmethod
    def build(cls, engine: PayoffEngine, opponent_lows: Sequence[Sequence[int]],
              opponent_highs: Sequence[Sequence[int]]) -> Optional['PayoffBounds']:
        """
        Args:
            engine: Payoff engine of the game
            opponent_lows: Bid weights of each opponent's lowest function
            opponent_highs: Bid weights of each opponent's highest function

        Returns:
            PayoffBounds, or None for second price
        """
        if engine.structure == Structure.SECOND_PRICE:
            return None
        # low bidding functions give the largest win probabilities
        table_high = engine.bid_table(opponent_lows)
        table_low = engine.bid_table(opponent_highs)
        return cls(engine, table_low, table_high)

    def lower(self, v: int, b: int) -> int:
        engine = self.engine
        if engine.structure == Structure.FIRST_PRICE and engine.value_units[v] < engine.bid_units[b]:
            return engine.payoff_units(v, b, self.table_high)
        return engine.payoff_units(v, b, self.table_low)

    def upper(self, v: int, b: int) -> int:
        engine = self.engine
        if engine.structure == Structure.FIRST_PRICE and engine.value_units[v] < engine.bid_units[b]:
            return engine.payoff_units(v, b, self.table_low)
        return engine.payoff_units(v, b, self.table_high)

    def dominator(self, v: int, b: int, candidates: Sequence[int]) -> Optional[int]:
        """Smallest candidate whose worst case beats the best case of b."""
        ceiling = self.upper(v, b)
        for other in candidates:
            if other != b and self.lower(v, other) > ceiling:
                return other
        return None


# ----------------------------------------------------------------------
# Round 1

def round1_bounds(spec: AuctionSpec, v: int) -> Tuple[int, ...]:
    """Surviving bids at value v after weak-dominance deletion."""
    x = spec.x
    if spec.structure == Structure.SECOND_PRICE:
        if spec.tie_rule == TieRule.FAIR_TIES:
            return (v,)
        return tuple(sorted({v, min(v + 1, x)}))
    if spec.structure == Structure.FIRST_PRICE:
        if v == 0:
            return (0,)
        if v == 1 and spec.tie_rule == TieRule.NO_WINNER_ON_TIES:
            return (0, 1)
        return tuple(range(v))
    if v <= 1:
        return (0,)
    return tuple(range(v))


def round1_weak_dominance(spec: AuctionSpec) -> ReducedGame:
    """
    Closed-form weak-dominance deletion.

    First price keeps bids below the value (plus bid 1 at value 1 without
    ties), all-pay additionally pins value 1 to bid 0, second price keeps
    truthful bids (and the next bid up without ties).

    Args:
        spec: Canonical game

    Returns:
        ReducedGame after round 1, with every removed bid in the trace

    Raises:
        ValueError: If the bid grid is not the value grid
    """
    if not spec.canonical:
        raise ValueError(f"round 1 needs a canonical game (bid grid = value grid {{0, δ, ..., xδ}}), "
                         f"got {spec.label()}")
    row = tuple(round1_bounds(spec, v) for v in range(spec.values.S))
    reason = {
        Structure.FIRST_PRICE: "weakly dominated: first-price bid above the undominated bound",
        Structure.ALL_PAY: "weakly dominated: all-pay bid above the undominated bound",
        Structure.SECOND_PRICE: "weakly dominated: second-price bid away from the value",
    }[spec.structure]

    trace = []
    for player in range(spec.n):
        for v, kept in enumerate(row):
            for b in range(spec.bids.S):
                if b not in kept:
                    trace.append(Deletion(player=player, value=v, bid=b, round=1, reason=reason))
    logger.info(f"Round 1 on {spec.label()}: {len(trace) // spec.n} deletions per player")
    return ReducedGame(allowed=tuple(row for _ in range(spec.n)), trace=tuple(trace))


# ----------------------------------------------------------------------
# Iterated strict dominance

class StrictDominanceReducer:
    """
    Iterated strict dominance by pure bids.

    Each sweep tests every surviving (player, value, bid) against the
    allowed sets at the start of the sweep and commits all deletions at
    the end. Tier (a) compares interval bounds on payoffs; tier (b)
    enumerates the monotone opponent profiles when there are at most
    EXACT_PROFILE_BUDGET of them.
    """

    EXACT_PROFILE_BUDGET = 4096

    def __init__(self, spec: AuctionSpec, exact_budget: Optional[int] = None):
        self.spec = spec
        self.engine = engine_for(spec)
        self.exact_budget = self.EXACT_PROFILE_BUDGET if exact_budget is None else exact_budget

    def reduce(self, reduced: ReducedGame) -> ReducedGame:
        allowed = [list(row) for row in reduced.allowed]
        trace = list(reduced.trace)
        downgrades = list(reduced.downgrades)
        round_number = reduced.rounds()

        while True:
            round_number += 1
            frozen = tuple(tuple(row) for row in allowed)
            symmetric = all(row == frozen[0] for row in frozen)
            players = [0] if symmetric else range(self.spec.n)

            sweep: Dict[int, List[Deletion]] = {}
            for player in players:
                deletions, downgrade = self._sweep_player(frozen, player, round_number)
                sweep[player] = deletions
                if downgrade is not None:
                    downgrades.append(downgrade)
            if symmetric:
                sweep = {
                    player: [d.model_copy(update={'player': player}) for d in sweep[0]]
                    for player in range(self.spec.n)
                }

            committed = [d for player in sorted(sweep) for d in sweep[player]]
            if not committed:
                break
            for d in committed:
                allowed[d.player][d.value] = tuple(b for b in allowed[d.player][d.value] if b != d.bid)
            trace.extend(committed)
            logger.debug(f"Strict round {round_number}: {len(committed)} deletions")

        result = ReducedGame(allowed=tuple(tuple(row) for row in allowed), trace=tuple(trace),
                             downgrades=tuple(downgrades))
        deleted = sum(1 for d in trace if d.round >= 2)
        logger.info(f"Strict dominance on {self.spec.label()}: {deleted} deletions, "
                    f"fixed point after round {round_number - 1}")
        return result

    def _sweep_player(self, allowed: Row, player: int,
                      round_number: int) -> Tuple[List[Deletion], Optional[TierDowngrade]]:
        opponents = [j for j in range(self.spec.n) if j != player]
        engine = self.engine
        own = allowed[player]
        deletions: List[Deletion] = []
        remaining: Dict[Tuple[int, int], bool] = {}

        extremes = [extreme_selections(allowed[j]) for j in opponents]
        if any(e is None for e in extremes):
            logger.warning(f"Player {player}: some opponent has no monotone selection; no deletions")
            return deletions, None

        bounds = PayoffBounds.build(
            engine,
            [engine.bid_weights(low) for low, _ in extremes],
            [engine.bid_weights(high) for _, high in extremes],
        )
        for v, bids in enumerate(own):
            for b in bids:
                dominator = bounds.dominator(v, b, bids) if bounds is not None else None
                if dominator is not None:
                    deletions.append(Deletion(player=player, value=v, bid=b, round=round_number,
                                              reason="interval bound", dominator=dominator))
                elif len(bids) > 1:
                    remaining[(v, b)] = True

        downgrade = None
        if remaining:
            profile_count = math.prod(monotone_count(allowed[j]) for j in opponents)
            if profile_count <= self.exact_budget:
                deletions.extend(self._exact_tier(allowed, player, opponents, sorted(remaining),
                                                  round_number, profile_count))
            else:
                downgrade = TierDowngrade(player=player, round=round_number,
                                          profile_count=profile_count, budget=self.exact_budget)
                logger.debug(f"Player {player} round {round_number}: exact tier skipped "
                             f"({profile_count} profiles > {self.exact_budget})")

        deletions.sort(key=lambda d: (d.value, d.bid))
        return deletions, downgrade

    def _exact_tier(self, allowed: Row, player: int, opponents: Sequence[int],
                    pending: Sequence[Tuple[int, int]], round_number: int,
                    profile_count: int) -> List[Deletion]:
        engine = self.engine
        own = allowed[player]
        opponent_weights = [
            [engine.bid_weights(beta) for beta in monotone_selections(allowed[j])]
            for j in opponents
        ]
        rows_per_profile = []
        for combination in itertools.product(*opponent_weights):
            table = engine.bid_table(combination)
            rows_per_profile.append({v: engine.payoff_row(v, table) for v in {v for v, _ in pending}})

        deletions = []
        for v, b in pending:
            for other in own[v]:
                if other == b:
                    continue
                if all(rows[v][other] > rows[v][b] for rows in rows_per_profile):
                    deletions.append(Deletion(
                        player=player, value=v, bid=b, round=round_number,
                        reason=f"exact over {profile_count} monotone opponent profiles",
                        dominator=other,
                    ))
                    break
        return deletions


def iterate_strict_dominance(spec: AuctionSpec, reduced: ReducedGame,
                             exact_budget: Optional[int] = None) -> ReducedGame:
    """
    Iterate strict dominance from a round-1 reduced game to its fixed point.

    Args:
        spec: Game the reduction belongs to
        reduced: Output of round1_weak_dominance (or a later stage)
        exact_budget: Max opponent profiles for the exact tier

    Returns:
        ReducedGame whose allowed sets only shrank
    """
    if reduced.n != spec.n or any(len(row) != spec.values.S for row in reduced.allowed):
        raise ValueError("reduced game does not match the spec's players and values")
    return StrictDominanceReducer(spec, exact_budget).reduce(reduced)


def reduce_game(spec: AuctionSpec, exact_budget: Optional[int] = None) -> ReducedGame:
    """Round 1 followed by iterated strict dominance."""
    return iterate_strict_dominance(spec, round1_weak_dominance(spec), exact_budget)


def strategy_count(reduced: ReducedGame, player: int = 0, monotone: bool = False) -> int:
    """
    Pure strategies left for one player.

    Args:
        reduced: Reduced game
        player: Player index
        monotone: Count only non-decreasing selections

    Returns:
        Product of allowed-set sizes (or the monotone selection count)
    """
    row = reduced.allowed[player]
    if monotone:
        return monotone_count(row)
    return math.prod(len(bids) for bids in row)


def unreduced_strategy_count(spec: AuctionSpec) -> int:
    """Bidding functions in the full game: |bids| ** |values|."""
    return spec.bids.S ** spec.values.S
