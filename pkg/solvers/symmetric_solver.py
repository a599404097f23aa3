"""
Symmetric equilibrium solver.
Finds every symmetric pure equilibrium in undominated strategies by a
depth-first search over monotone bidding functions, pruning prefixes
whose already-determined payoffs admit a strictly better bid. Exhausting
the search certifies that no other symmetric equilibrium exists.
"""

import logging
import time
from typing import List, Optional, Sequence, Tuple

from analysis.known_patterns import ceil_half, floor_half, known_se_patterns
from analysis.thresholds import FairTiesClass, fair_ties_class, prop3_predicate
from games.data_schemas import (
    AuctionSpec,
    BiddingFunction,
    EquilibriumCheck,
    StrategyProfile,
    Structure,
    TieRule,
)
from games.payoff_engine import PayoffEngine, engine_for, is_equilibrium
from solvers import SolverInvariantError
from solvers.dominance import round1_bounds
from solvers.result_schemas import BranchRecord, Certificate, SearchStats, SymmetricSolveReport

logger = logging.getLogger(__name__)


def verify_symmetric(spec: AuctionSpec, beta: BiddingFunction) -> EquilibriumCheck:
    """is_equilibrium on the profile where every player uses beta."""
    return is_equilibrium(spec, StrategyProfile.symmetric(beta, spec.n))


def fair_ties_jump_violations(beta: BiddingFunction) -> List[int]:
    """
    Values with a jump where β(v) >= (2 - √3)·v.

    Exact test: β >= (2 - √3)v ⇔ 2v - β <= 0 or 3v² >= (2v - β)².
    """
    violations = []
    for v in beta.jumps():
        b = beta[v]
        gap = 2 * v - b
        if gap <= 0 or 3 * v * v >= gap * gap:
            violations.append(v)
    return violations


def solve_second_price(spec: AuctionSpec) -> SymmetricSolveReport:
    """
    Second-price symmetric equilibria.

    Fair ties: truthful bidding only. Without ties any per-value choice
    between v and min(v + 1, x) is payoff-equivalent; the two extremal
    functions are reported.
    """
    if spec.structure != Structure.SECOND_PRICE:
        raise ValueError(f"solve_second_price needs a second-price game, got {spec.structure.value}")
    S, x = spec.values.S, spec.x
    candidates = [BiddingFunction.from_rule(S, lambda v: v)]
    notes = []
    if spec.tie_rule == TieRule.NO_WINNER_ON_TIES:
        shifted = BiddingFunction.from_rule(S, lambda v: min(v + 1, x))
        if shifted != candidates[0]:
            candidates.append(shifted)
        notes.append(
            f"every per-value choice between v and min(v+1, {x}) is payoff-equivalent "
            f"({2 ** (S - 1)} functions); the extremal two are listed"
        )
    for beta in candidates:
        check = verify_symmetric(spec, beta)
        if not check.is_equilibrium:
            raise SolverInvariantError(f"second-price function {beta.bid_of} failed verification: {check.witness}")
    return SymmetricSolveReport(
        game=spec.label(),
        equilibria=sorted(candidates, key=lambda b: b.bid_of),
        certificate=Certificate.ANALYTIC_THRESHOLD,
        reference="second price: bidding one's value is weakly dominant",
        notes=notes,
    )


class SymmetricSearch:
    """
    Depth-first search over monotone round-1 bidding functions.

    With no_jumps the bid rises by at most one step per value (the shape
    every no-ties equilibrium has). Payoffs of bids strictly below the
    current top bid, and of the top bid itself without ties, depend only
    on the prefix, which is what the pruning uses.
    """

    def __init__(self, spec: AuctionSpec, no_jumps: bool, prune: bool = True,
                 first_bids: Optional[Sequence[int]] = None):
        self.spec = spec
        self.engine: PayoffEngine = engine_for(spec)
        self.no_jumps = no_jumps
        self.prune = prune
        self.fair = spec.tie_rule == TieRule.FAIR_TIES
        self.rows = [round1_bounds(spec, v) for v in range(spec.values.S)]
        if first_bids is not None:
            self.rows[1] = tuple(b for b in self.rows[1] if b in first_bids)
        self.stats = SearchStats()
        self.found: List[Tuple[int, ...]] = []

    def choices(self, v: int, previous: int) -> List[int]:
        return [b for b in self.rows[v]
                if b >= previous and (not self.no_jumps or v == 0 or b <= previous + 1)]

    def run(self) -> List[Tuple[int, ...]]:
        started = time.perf_counter()
        weights = [0] * self.engine.B
        self._extend([], weights)
        self.stats.wall_time_seconds = time.perf_counter() - started
        return self.found

    def _extend(self, beta: List[int], weights: List[int]) -> None:
        v = len(beta)
        if v == self.spec.values.S:
            self.stats.leaves_verified += 1
            if self.engine.check_profile([tuple(beta)] * self.spec.n).is_equilibrium:
                self.found.append(tuple(beta))
            return
        previous = beta[-1] if beta else 0
        for b in self.choices(v, previous):
            self.stats.nodes += 1
            beta.append(b)
            weights[b] += self.engine.weights[v]
            if self.prune and self._refuted(beta, weights, previous):
                self.stats.prunes += 1
            else:
                self._extend(beta, weights)
            weights[b] -= self.engine.weights[v]
            beta.pop()

    def _refuted(self, beta: List[int], weights: List[int], old_top: int) -> bool:
        """Whether a prefix-determined deviation beats some fixed value's bid."""
        engine = self.engine
        v = len(beta) - 1
        new_top = beta[-1]
        if v == 0:
            return False
        if self.fair and new_top == old_top:
            return False
        table = engine.bid_table([weights] * (self.spec.n - 1))

        def improves(w: int, deviations: range) -> bool:
            current = engine.payoff_units(w, beta[w], table)
            return any(engine.payoff_units(w, d, table) > current for d in deviations)

        if self.fair:
            # the group at old_top is now closed
            for w in range(v):
                if beta[w] == old_top and improves(w, range(new_top)):
                    return True
                if beta[w] < old_top and improves(w, range(old_top, new_top)):
                    return True
            return False

        if improves(v, range(new_top + 1)):
            return True
        if new_top > old_top:
            return any(improves(w, range(old_top + 1, new_top + 1)) for w in range(v))
        return False


class SymmetricSolver:
    """Dispatches a game to the right symmetric search and checks the result."""

    FAIR_TIES_CAP = 16
    NO_TIES_CAP = 32

    def __init__(self, spec: AuctionSpec, prune: bool = True, cap: Optional[int] = None):
        if not spec.canonical:
            raise ValueError(f"symmetric solvers need a canonical game, got {spec.label()}")
        self.spec = spec
        self.prune = prune
        self.cap = cap

    def solve(self) -> SymmetricSolveReport:
        spec = self.spec
        if spec.structure == Structure.SECOND_PRICE:
            return solve_second_price(spec)
        if spec.tie_rule == TieRule.NO_WINNER_ON_TIES:
            return self.solve_no_ties()
        return self.solve_with_ties()

    # ------------------------------------------------------------------

    def solve_no_ties(self) -> SymmetricSolveReport:
        spec = self.spec
        self._require(TieRule.NO_WINNER_ON_TIES)
        cap = self.cap if self.cap is not None else self.NO_TIES_CAP
        if spec.x > cap:
            return self._beyond_cap(cap)

        logger.info(f"Symmetric no-ties search on {spec.label()}")
        found: List[Tuple[int, ...]] = []
        stats = SearchStats()
        branch_log = []
        if spec.x == 0:
            branches: List[Optional[int]] = [None]
        elif spec.structure == Structure.FIRST_PRICE:
            branches = [0, 1]
        else:
            branches = [0]
        for first in branches:
            search = SymmetricSearch(spec, no_jumps=True, prune=self.prune,
                                     first_bids=None if first is None else [first])
            branch = search.run()
            stats = stats.merge(search.stats)
            found.extend(branch)
            if first is not None:
                branch_log.append(BranchRecord(bid_at_one=first, equilibria=len(branch)))

        limit = 2 if spec.structure == Structure.FIRST_PRICE else 1
        if len(found) > limit:
            raise SolverInvariantError(
                f"{len(found)} symmetric equilibria found for {spec.label()}, at most {limit} possible"
            )
        return self._report(found, stats, branch_log)

    def solve_with_ties(self) -> SymmetricSolveReport:
        spec = self.spec
        self._require(TieRule.FAIR_TIES)
        cap = self.cap if self.cap is not None else self.FAIR_TIES_CAP
        if spec.x > cap:
            return self._beyond_cap(cap)

        logger.info(f"Symmetric fair-ties search on {spec.label()}")
        search = SymmetricSearch(spec, no_jumps=False, prune=self.prune)
        found = search.run()
        if spec.structure == Structure.FIRST_PRICE and spec.n == 2:
            for beta in found:
                violations = fair_ties_jump_violations(BiddingFunction(bid_of=beta))
                if violations:
                    raise SolverInvariantError(
                        f"equilibrium {beta} jumps at values {violations} where β(v) >= (2 - √3)v"
                    )
        return self._report(found, search.stats, [])

    # ------------------------------------------------------------------

    def _require(self, tie_rule: TieRule) -> None:
        if self.spec.structure == Structure.SECOND_PRICE:
            raise ValueError("second-price games are solved by solve_second_price")
        if self.spec.tie_rule != tie_rule:
            raise ValueError(f"this search needs tie rule {tie_rule.value}, got {self.spec.tie_rule.value}")

    def _report(self, found: List[Tuple[int, ...]], stats: SearchStats,
                branch_log: List[BranchRecord]) -> SymmetricSolveReport:
        spec = self.spec
        equilibria = [BiddingFunction(bid_of=beta) for beta in sorted(set(found))]
        for beta in equilibria:
            if not beta.is_monotone():
                raise SolverInvariantError(f"non-monotone equilibrium {beta.bid_of}")
            if spec.tie_rule == TieRule.NO_WINNER_ON_TIES and not beta.has_no_jumps():
                raise SolverInvariantError(f"no-ties equilibrium {beta.bid_of} jumps at {beta.jumps()}")
        marker = "✓" if equilibria else "✗"
        logger.info(f"{marker} {spec.label()}: {len(equilibria)} symmetric equilibria "
                    f"({stats.nodes} nodes, {stats.prunes} prunes, {stats.leaves_verified} leaves)")
        return SymmetricSolveReport(
            game=spec.label(),
            equilibria=equilibria,
            certificate=Certificate.EXHAUSTED,
            branch_log=branch_log,
            stats=stats,
        )

    def _beyond_cap(self, cap: int) -> SymmetricSolveReport:
        """Fall back on a closed-form result, or report the run as inconclusive."""
        spec = self.spec
        reference = None
        equilibria: List[BiddingFunction] = []
        uniform = spec.distribution.is_uniform
        fair = spec.tie_rule == TieRule.FAIR_TIES

        if uniform and spec.structure == Structure.ALL_PAY and spec.x >= 10:
            reference = "all-pay: no symmetric pure equilibrium once x >= 10"
        elif uniform and spec.structure == Structure.FIRST_PRICE and not fair:
            if spec.n == 2:
                reference = "first price, two bidders, no ties: exactly floor(v/2) and ceil(v/2)"
                equilibria = [floor_half(spec.values.S), ceil_half(spec.values.S)]
            elif prop3_predicate(spec.n, spec.x):
                reference = "first price, no ties: x above 2^(1/(n-1)) / (2^(1/(n-1)) - 1)"
        elif uniform and spec.structure == Structure.FIRST_PRICE and fair:
            category = fair_ties_class(spec.n, spec.x)
            if category == FairTiesClass.N2_EVEN_NO_SE:
                reference = "first price, two bidders, fair ties: no equilibrium for even x >= 10"
            elif category == FairTiesClass.N2_ODD_SE and spec.x >= 10:
                reference = "first price, two bidders, fair ties: floor(v/2) is the only candidate for x >= 10"
                equilibria = known_se_patterns(spec)
            elif category == FairTiesClass.N3_MULT3_NO_SE:
                reference = "first price, three bidders, fair ties: no equilibrium when 3 divides x >= 10"

        if reference is None:
            logger.warning(f"✗ {spec.label()}: x={spec.x} exceeds the search cap {cap}; inconclusive")
            return SymmetricSolveReport(
                game=spec.label(),
                certificate=Certificate.INCONCLUSIVE,
                notes=[f"x = {spec.x} exceeds the search cap {cap}; raise the cap to search"],
            )

        for beta in equilibria:
            check = verify_symmetric(spec, beta)
            if not check.is_equilibrium:
                raise SolverInvariantError(f"closed-form equilibrium {beta.bid_of} failed verification: "
                                           f"{check.witness}")
        logger.info(f"{spec.label()}: beyond cap {cap}, using closed form ({reference})")
        return SymmetricSolveReport(
            game=spec.label(),
            equilibria=equilibria,
            certificate=Certificate.ANALYTIC_THRESHOLD,
            reference=reference,
            notes=[f"x = {spec.x} exceeds the search cap {cap}"],
        )


def solve_symmetric_no_ties(spec: AuctionSpec, prune: bool = True, cap: Optional[int] = None) -> SymmetricSolveReport:
    """
    Symmetric equilibria of a first-price or all-pay game without ties.

    β(0) = 0; first price branches on β(1) ∈ {0, 1}, all-pay fixes
    β(1) = 0; every later step stays or rises by one.

    Args:
        spec: Canonical first-price or all-pay game with NoWinnerOnTies
        prune: Cut prefixes refuted by a determined deviation
        cap: Largest x searched (NO_TIES_CAP by default)

    Returns:
        SymmetricSolveReport with branch_log per β(1) branch
    """
    return SymmetricSolver(spec, prune, cap).solve_no_ties()


def solve_symmetric_with_ties(spec: AuctionSpec, prune: bool = True, cap: Optional[int] = None) -> SymmetricSolveReport:
    """
    Symmetric equilibria of a first-price or all-pay game with fair ties.

    Searches every monotone round-1 bidding function, jumps included.
    Games with x above the cap are inconclusive unless a closed-form
    result covers them.
    """
    return SymmetricSolver(spec, prune, cap).solve_with_ties()


def solve_symmetric(spec: AuctionSpec, prune: bool = True, cap: Optional[int] = None) -> SymmetricSolveReport:
    """Symmetric equilibria of any canonical game."""
    return SymmetricSolver(spec, prune, cap).solve()


def enumerate_monotone_candidates(spec: AuctionSpec, no_jumps: bool) -> List[BiddingFunction]:
    """Every symmetric equilibrium among monotone round-1 functions, with no pruning."""
    search = SymmetricSearch(spec, no_jumps=no_jumps, prune=False)
    return [BiddingFunction(bid_of=beta) for beta in sorted(search.run())]
