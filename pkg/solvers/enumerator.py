"""
Pure-strategy equilibrium enumerator.
Backtracks over the bidding functions of players 0..n-2, completes each
partial profile with the last player's exact best responses, and prunes
partial profiles in which a fixed player already has a strictly better
bid against every possible completion.
"""

import itertools
import logging
import math
import time
from multiprocessing import Pool
from typing import Iterable, List, Optional, Sequence, Set, Tuple

from games.data_schemas import AuctionSpec, BiddingFunction, StrategyProfile, Structure
from games.payoff_engine import engine_for
from solvers import SolverInvariantError
from solvers.dominance import (
    PayoffBounds,
    all_selections,
    extreme_selections,
    monotone_count,
    monotone_selections,
)
from solvers.result_schemas import (
    AllowedSets,
    EnumerationResult,
    EnumerationStatus,
    ReducedGame,
    Scope,
    SearchStats,
)

logger = logging.getLogger(__name__)

Profile = Tuple[Tuple[int, ...], ...]


class BudgetExhausted(Exception):
    """Raised inside a search when its node budget runs out."""


class FirstFound(Exception):
    """Raised inside a search to stop at the first equilibrium."""


class ProfileSearch:
    """
    One backtracking search over a slice of player 0's candidates.

    When every player has the same allowed sets the search only visits
    profiles whose functions are non-decreasing in candidate order; the
    caller expands permutations afterwards.
    """

    def __init__(self, spec: AuctionSpec, allowed: AllowedSets, scope: Scope,
                 budget: int, stop_at_first: bool = False):
        self.spec = spec
        self.engine = engine_for(spec)
        self.n = spec.n
        self.allowed = allowed
        self.scope = scope
        self.budget = budget
        self.stop_at_first = stop_at_first
        self.symmetric = all(row == allowed[0] for row in allowed)
        self.monotone = scope == Scope.MONOTONE_UNDOMINATED

        select = monotone_selections if self.monotone else all_selections
        if self.symmetric:
            shared = [tuple(beta) for beta in select(allowed[0])]
            self.candidates = [shared] * self.n
        else:
            self.candidates = [[tuple(beta) for beta in select(row)] for row in allowed]
        self.weights = {
            beta: self.engine.bid_weights(beta)
            for player_candidates in self.candidates[:-1] for beta in player_candidates
        }

        self.bounded = spec.structure != Structure.SECOND_PRICE
        self.extremes = []
        for row in allowed:
            extreme = extreme_selections(row, monotone=self.monotone)
            if extreme is None:
                self.extremes.append(None)
                continue
            low, high = extreme
            self.extremes.append((self.engine.bid_weights(low), self.engine.bid_weights(high)))

        self.stats = SearchStats(budget=budget)
        self.found: List[Profile] = []

    def run(self, first_indices: Iterable[int]) -> None:
        started = time.perf_counter()
        try:
            for index in first_indices:
                self._descend([index])
        except BudgetExhausted:
            self.stats.budget_exhausted = True
        except FirstFound:
            pass
        self.stats.wall_time_seconds = time.perf_counter() - started

    def _tick(self) -> None:
        self.stats.nodes += 1
        if self.stats.nodes > self.budget:
            raise BudgetExhausted()

    def _functions(self, chosen: Sequence[int]) -> List[Tuple[int, ...]]:
        return [self.candidates[player][index] for player, index in enumerate(chosen)]

    def _descend(self, chosen: List[int]) -> None:
        self._tick()
        if len(chosen) == self.n - 1:
            self._complete(chosen)
            return
        if self.bounded and self._pruned(chosen):
            self.stats.prunes += 1
            return
        level = len(chosen)
        start = chosen[-1] if self.symmetric else 0
        for index in range(start, len(self.candidates[level])):
            chosen.append(index)
            self._descend(chosen)
            chosen.pop()

    def _pruned(self, chosen: Sequence[int]) -> bool:
        """True when some fixed player's bid loses to another bid against every completion."""
        functions = self._functions(chosen)
        fixed = len(functions)
        if any(self.extremes[j] is None for j in range(fixed, self.n)):
            return True
        for player, beta in enumerate(functions):
            lows, highs = [], []
            for j in range(self.n):
                if j == player:
                    continue
                if j < fixed:
                    exact = self.weights[functions[j]]
                    lows.append(exact)
                    highs.append(exact)
                else:
                    low, high = self.extremes[j]
                    lows.append(low)
                    highs.append(high)
            bounds = PayoffBounds.build(self.engine, lows, highs)
            every_bid = range(self.engine.B)
            for v, b in enumerate(beta):
                if bounds.dominator(v, b, every_bid) is not None:
                    return True
        return False

    def _complete(self, chosen: Sequence[int]) -> None:
        """Try every best-responding last player against the fixed players."""
        functions = self._functions(chosen)
        engine = self.engine
        last = self.n - 1
        fixed_weights = [self.weights[beta] for beta in functions]
        table = engine.bid_table(fixed_weights)
        best = engine.best_responses(table)
        row = []
        for v, responses in enumerate(best):
            kept = tuple(b for b in responses if b in self.allowed[last][v])
            if not kept:
                self.stats.prunes += 1
                return
            row.append(kept)

        select = monotone_selections if self.monotone else all_selections
        floor = functions[-1] if self.symmetric else None
        for beta in select(tuple(row)):
            beta = tuple(beta)
            if floor is not None and beta < floor:
                continue
            self._tick()
            self.stats.leaves_verified += 1
            weights = fixed_weights + [engine.bid_weights(beta)]
            if all(engine.check_player(i, weights, functions[i]) is None for i in range(last)):
                self.found.append(tuple(functions) + (beta,))
                if self.stop_at_first:
                    raise FirstFound()


def _search_slice(task: tuple) -> Tuple[List[Profile], SearchStats]:
    """Worker entry point: run one ProfileSearch over a slice of player 0's candidates."""
    spec, allowed, scope, budget, stop_at_first, first_indices = task
    search = ProfileSearch(spec, allowed, scope, budget, stop_at_first)
    search.run(first_indices)
    return search.found, search.stats


def candidate_count(allowed: AllowedSets, scope: Scope) -> int:
    """Bidding functions per player the scope allows, summed over players."""
    if scope == Scope.MONOTONE_UNDOMINATED:
        return sum(monotone_count(row) for row in allowed)
    return sum(math.prod(len(bids) for bids in row) for row in allowed)


class EquilibriumEnumerator:
    """Finds all pure equilibria of a reduced game within a scope."""

    NODE_BUDGET = 10 ** 8
    CHUNKS_PER_JOB = 4

    def __init__(self, spec: AuctionSpec, reduced: ReducedGame,
                 scope: Scope = Scope.MONOTONE_UNDOMINATED, budget: Optional[int] = None,
                 jobs: int = 1, stop_at_first: bool = False, collapse: bool = False):
        if reduced.n != spec.n or any(len(row) != spec.values.S for row in reduced.allowed):
            raise ValueError("reduced game does not match the spec's players and values")
        if any(b >= spec.bids.S for row in reduced.allowed for bids in row for b in bids):
            raise ValueError("reduced game uses bids outside the spec's bid grid")
        self.spec = spec
        self.reduced = reduced
        self.scope = scope
        self.budget = self.NODE_BUDGET if budget is None else budget
        self.jobs = max(1, jobs)
        self.stop_at_first = stop_at_first
        self.collapse = collapse

    def run(self) -> EnumerationResult:
        spec = self.spec
        allowed = self.reduced.allowed
        started = time.perf_counter()

        if candidate_count(allowed, self.scope) > self.budget:
            logger.warning(f"✗ {spec.label()}: candidate functions exceed the node budget {self.budget}")
            return self._result([], SearchStats(budget=self.budget, budget_exhausted=True))

        probe = ProfileSearch(spec, allowed, self.scope, self.budget, self.stop_at_first)
        first = list(range(len(probe.candidates[0])))
        logger.info(f"Enumerating {spec.label()} ({self.scope.value}): "
                    f"{len(first)} candidates for player 0, jobs={self.jobs}")

        found: List[Profile] = []
        stats = SearchStats(budget=self.budget)
        if self.jobs == 1 or len(first) < 2:
            probe.run(first)
            found, stats = probe.found, probe.stats
        else:
            chunk_count = min(len(first), self.jobs * self.CHUNKS_PER_JOB)
            tasks = [(spec, allowed, self.scope, self.budget, self.stop_at_first, first[k::chunk_count])
                     for k in range(chunk_count)]
            with Pool(self.jobs) as pool:
                for chunk_found, chunk_stats in pool.imap_unordered(_search_slice, tasks):
                    found.extend(chunk_found)
                    stats = stats.merge(chunk_stats)
                    if self.stop_at_first and found:
                        pool.terminate()
                        break

        stats = stats.model_copy(update={'wall_time_seconds': time.perf_counter() - started,
                                         'budget': self.budget})
        profiles = self._expand(found, probe.symmetric)
        if self.stop_at_first and profiles:
            profiles = profiles[:1]
        self._verify(profiles)
        return self._result(profiles, stats)

    def _expand(self, found: Sequence[Profile], symmetric_search: bool) -> List[Profile]:
        unique: Set[Profile] = set()
        for profile in found:
            if self.collapse:
                unique.add(tuple(sorted(profile)))
            elif symmetric_search:
                unique.update(itertools.permutations(profile))
            else:
                unique.add(profile)
        return sorted(unique)

    def _verify(self, profiles: Sequence[Profile]) -> None:
        engine = engine_for(self.spec)
        for profile in profiles:
            check = engine.check_profile(profile)
            if not check.is_equilibrium:
                raise SolverInvariantError(f"enumerated profile {profile} fails verification: {check.witness}")

    def _result(self, profiles: Sequence[Profile], stats: SearchStats) -> EnumerationResult:
        status = EnumerationStatus.INCONCLUSIVE if stats.budget_exhausted and not (
            self.stop_at_first and profiles) else EnumerationStatus.COMPLETE
        equilibria = [
            StrategyProfile(players=tuple(BiddingFunction(bid_of=beta) for beta in profile))
            for profile in profiles
        ]
        marker = "✓" if equilibria else ("?" if status == EnumerationStatus.INCONCLUSIVE else "✗")
        logger.info(f"{marker} {self.spec.label()}: {len(equilibria)} equilibria, status {status.value} "
                    f"({stats.nodes} nodes, {stats.prunes} prunes, {stats.leaves_verified} leaves)")
        return EnumerationResult(
            game=self.spec.label(),
            equilibria=equilibria,
            exists=bool(equilibria),
            status=status,
            scope=self.scope,
            search_stats=stats,
            collapsed=self.collapse,
            stopped_at_first=self.stop_at_first,
        )


def enumerate_pure_equilibria(spec: AuctionSpec, reduced: ReducedGame,
                              scope: Scope = Scope.MONOTONE_UNDOMINATED,
                              budget: Optional[int] = None, jobs: int = 1,
                              stop_at_first: bool = False, collapse: bool = False) -> EnumerationResult:
    """
    All pure-strategy equilibria that use only the reduced game's bids.

    Args:
        spec: Game description
        reduced: Surviving bids per player and value
        scope: Monotone selections only, or every selection
        budget: Node budget (visited partial profiles plus checked leaves)
        jobs: Worker processes; 1 searches inline
        stop_at_first: End the search at the first equilibrium
        collapse: Merge profiles that are permutations of each other

    Returns:
        EnumerationResult; status is inconclusive when the budget ran out
        before the search was complete
    """
    return EquilibriumEnumerator(spec, reduced, scope, budget, jobs, stop_at_first, collapse).run()
