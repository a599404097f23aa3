"""
Result schemas for the solvers.
Pydantic models for reduced games, symmetric-solver reports and
enumeration results. Every report serializes to JSON with exact
rationals as "p/q" strings.
"""

from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from games.data_schemas import BiddingFunction, DeviationWitness, StrategyProfile

AllowedSets = Tuple[Tuple[Tuple[int, ...], ...], ...]


class Deletion(BaseModel):
    """One (player, value, bid) removed from the game."""

    model_config = ConfigDict(frozen=True)

    player: int = Field(..., ge=0)
    value: int = Field(..., ge=0)
    bid: int = Field(..., ge=0)
    round: int = Field(..., ge=1, description="1 for weak dominance, 2+ for strict sweeps")
    reason: str = Field(..., description="Which rule fired")
    dominator: Optional[int] = Field(default=None, description="Bid shown to do strictly better")


class TierDowngrade(BaseModel):
    """A sweep in which the exact tier was skipped because of its budget."""

    model_config = ConfigDict(frozen=True)

    player: int = Field(..., ge=0)
    round: int = Field(..., ge=2)
    profile_count: int = Field(..., description="Monotone opponent profiles that would be enumerated")
    budget: int = Field(..., description="Configured exact-tier budget")


class ReducedGame(BaseModel):
    """
    Surviving bids per player and value, plus the deletion trace.

    allowed[i][v] is the ascending tuple of bid indices player i may still
    use at value index v.
    """

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "allowed": [[[0], [0, 1], [1]], [[0], [0, 1], [1]]],
                "trace": [{"player": 0, "value": 2, "bid": 0, "round": 2,
                           "reason": "interval", "dominator": 1}],
                "downgrades": [],
            }
        },
    )

    allowed: AllowedSets = Field(..., description="Per player, per value: surviving bid indices")
    trace: Tuple[Deletion, ...] = Field(default=(), description="Deletions in the order they were committed")
    downgrades: Tuple[TierDowngrade, ...] = Field(default=(), description="Sweeps where the exact tier was skipped")

    @model_validator(mode='after')
    def _non_empty(self) -> 'ReducedGame':
        for i, row in enumerate(self.allowed):
            for v, bids in enumerate(row):
                if not bids:
                    raise ValueError(f"allowed set of player {i} at value {v} is empty")
        return self

    @property
    def n(self) -> int:
        return len(self.allowed)

    @property
    def is_symmetric(self) -> bool:
        return all(row == self.allowed[0] for row in self.allowed)

    def rounds(self) -> int:
        return max((d.round for d in self.trace), default=1)


class Certificate(str, Enum):
    """How a symmetric-solver result is backed."""

    EXHAUSTED = "exhausted"
    ANALYTIC_THRESHOLD = "analytic_threshold"
    INCONCLUSIVE = "inconclusive"


class SearchStats(BaseModel):
    """Counters for a search run."""

    nodes: int = Field(default=0, description="Partial assignments visited")
    prunes: int = Field(default=0, description="Branches cut by a prefix or bound argument")
    leaves_verified: int = Field(default=0, description="Complete candidates checked exactly")
    budget: Optional[int] = Field(default=None, description="Node budget in force")
    budget_exhausted: bool = Field(default=False)
    wall_time_seconds: float = Field(default=0.0)

    def merge(self, other: 'SearchStats') -> 'SearchStats':
        return SearchStats(
            nodes=self.nodes + other.nodes,
            prunes=self.prunes + other.prunes,
            leaves_verified=self.leaves_verified + other.leaves_verified,
            budget=self.budget if self.budget is not None else other.budget,
            budget_exhausted=self.budget_exhausted or other.budget_exhausted,
            wall_time_seconds=self.wall_time_seconds + other.wall_time_seconds,
        )


class BranchRecord(BaseModel):
    """Which first-step branch an equilibrium came from."""

    bid_at_one: int = Field(..., description="β(1) on this branch")
    equilibria: int = Field(..., ge=0, description="Equilibria found under the branch")


class SymmetricSolveReport(BaseModel):
    """All symmetric pure equilibria in undominated strategies, or a certificate that there are none."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    game: str = Field(..., description="Label of the solved game")
    equilibria: List[BiddingFunction] = Field(default_factory=list)
    certificate: Certificate = Field(..., description="What backs the list")
    reference: Optional[str] = Field(default=None, description="Analytic result used when not exhausted")
    branch_log: List[BranchRecord] = Field(default_factory=list)
    stats: SearchStats = Field(default_factory=SearchStats)
    notes: List[str] = Field(default_factory=list)

    @property
    def inconclusive(self) -> bool:
        return self.certificate == Certificate.INCONCLUSIVE

    @property
    def exists(self) -> bool:
        return bool(self.equilibria)


class Scope(str, Enum):
    """Which bidding functions the enumerator searches."""

    MONOTONE_UNDOMINATED = "monotone_undominated"
    FULLY_EXHAUSTIVE = "fully_exhaustive"


class EnumerationStatus(str, Enum):
    COMPLETE = "complete"
    INCONCLUSIVE = "inconclusive"


class EnumerationResult(BaseModel):
    """Pure-strategy equilibria found within a search scope."""

    game: str = Field(..., description="Label of the enumerated game")
    equilibria: List[StrategyProfile] = Field(default_factory=list)
    exists: bool = Field(..., description="True when at least one equilibrium was found")
    status: EnumerationStatus = Field(default=EnumerationStatus.COMPLETE)
    scope: Scope = Field(default=Scope.MONOTONE_UNDOMINATED)
    search_stats: SearchStats = Field(default_factory=SearchStats)
    collapsed: bool = Field(default=False, description="Permutation-equivalent profiles merged")
    stopped_at_first: bool = Field(default=False, description="Search ended at the first equilibrium")

    @model_validator(mode='after')
    def _exists_matches(self) -> 'EnumerationResult':
        if self.exists != bool(self.equilibria):
            raise ValueError("exists must equal (equilibria non-empty)")
        return self

    @property
    def inconclusive(self) -> bool:
        return self.status == EnumerationStatus.INCONCLUSIVE


class VerifyReport(BaseModel):
    """Verdict on a user-supplied profile, with best-response sets where it fails."""

    game: str
    is_equilibrium: bool
    witness: Optional[DeviationWitness] = None
    failing_best_responses: List[Tuple[int, int, Tuple[int, ...]]] = Field(
        default_factory=list,
        description="(player, value, argmax bid set) for every value whose bid is not a best response",
    )
