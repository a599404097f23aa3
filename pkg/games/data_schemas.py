"""
Data schemas for discrete auction games.
Defines Pydantic models for the game description, strategies and
equilibrium-check results. Rationals are kept as Fraction and
serialized as "p/q" strings.
"""

from enum import Enum
from fractions import Fraction
from typing import Annotated, Any, Callable, List, Optional, Tuple

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    WithJsonSchema,
    field_validator,
    model_validator,
)


def parse_rational(value: Any) -> Fraction:
    """
    Parse a rational from "p/q", "p", int or Fraction.

    Args:
        value: Raw value from JSON, CLI or Python code

    Returns:
        Fraction in canonical reduced form

    Example:
        >>> parse_rational("6/4")
        Fraction(3, 2)
    """
    if isinstance(value, bool):
        raise ValueError(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"not a rational 'p/q' string: {value!r}") from e
    raise ValueError(f"rationals must be 'p/q' strings or integers, got {type(value).__name__}")


def format_rational(value: Fraction) -> str:
    """Render a Fraction as "p/q" (or "p" when integral)."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


Rational = Annotated[
    Fraction,
    PlainValidator(parse_rational),
    PlainSerializer(format_rational, return_type=str),
    WithJsonSchema({"type": "string", "pattern": r"^-?\d+(/\d+)?$"}),
]


class Structure(str, Enum):
    """Auction payment structure."""

    FIRST_PRICE = "first_price"
    SECOND_PRICE = "second_price"
    ALL_PAY = "all_pay"


class TieRule(str, Enum):
    """What happens when several bidders tie for the highest bid."""

    FAIR_TIES = "fair_ties"
    NO_WINNER_ON_TIES = "no_winner_on_ties"


STRUCTURE_ALIASES = {
    'fp': Structure.FIRST_PRICE, 'first_price': Structure.FIRST_PRICE,
    'sp': Structure.SECOND_PRICE, 'second_price': Structure.SECOND_PRICE,
    'ap': Structure.ALL_PAY, 'allpay': Structure.ALL_PAY, 'all_pay': Structure.ALL_PAY,
}

TIE_RULE_ALIASES = {
    'fair': TieRule.FAIR_TIES, 'fair_ties': TieRule.FAIR_TIES,
    'none': TieRule.NO_WINNER_ON_TIES, 'no_winner_on_ties': TieRule.NO_WINNER_ON_TIES,
}


class GridSpec(BaseModel):
    """
    A finite grid of currency amounts indexed 0..x.

    Regular grids are {origin, origin + delta, ..., origin + x*delta}.
    Grids built by the continuum bridge may list their points explicitly.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True, extra='forbid')

    delta: Rational = Field(..., description="Step size in currency units")
    x: int = Field(..., ge=0, description="Maximum grid index")
    origin: Rational = Field(default=Fraction(0), description="Amount at index 0")
    points: Optional[Tuple[Rational, ...]] = Field(
        default=None,
        description="Explicit strictly increasing amounts (overrides origin/delta)"
    )

    @field_validator('delta')
    @classmethod
    def _positive_delta(cls, value: Fraction) -> Fraction:
        if value <= 0:
            raise ValueError(f"delta must be positive, got {format_rational(value)}")
        return value

    @model_validator(mode='after')
    def _check_points(self) -> 'GridSpec':
        if self.points is not None:
            if len(self.points) != self.x + 1:
                raise ValueError(f"points has {len(self.points)} entries, expected x + 1 = {self.x + 1}")
            if any(a >= b for a, b in zip(self.points, self.points[1:])):
                raise ValueError("grid points must be strictly increasing")
        return self

    @property
    def S(self) -> int:
        """Number of grid points."""
        return self.x + 1

    @property
    def regular(self) -> bool:
        return self.points is None

    def amount(self, index: int) -> Fraction:
        """Currency amount at a grid index."""
        if self.points is not None:
            return self.points[index]
        return self.origin + index * self.delta

    def amounts(self) -> Tuple[Fraction, ...]:
        return tuple(self.amount(i) for i in range(self.S))


class ValueDistribution(BaseModel):
    """Probability mass function over the value grid indices."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True, extra='forbid')

    pmf: Tuple[Rational, ...] = Field(..., min_length=1, description="Mass at each value index")

    @field_validator('pmf')
    @classmethod
    def _check_pmf(cls, value: Tuple[Fraction, ...]) -> Tuple[Fraction, ...]:
        for index, mass in enumerate(value):
            if mass <= 0:
                raise ValueError(f"pmf[{index}] = {format_rational(mass)} is not strictly positive")
        total = sum(value, Fraction(0))
        if total != 1:
            raise ValueError(f"pmf sums to {format_rational(total)}, expected 1")
        return value

    @classmethod
    def uniform(cls, size: int) -> 'ValueDistribution':
        return cls(pmf=tuple(Fraction(1, size) for _ in range(size)))

    @property
    def is_uniform(self) -> bool:
        return len(set(self.pmf)) == 1


class AuctionSpec(BaseModel):
    """
    Full description of a discrete independent-private-value auction game.
    """

    model_config = ConfigDict(
        frozen=True,
        arbitrary_types_allowed=True,
        extra='forbid',
        json_schema_extra={
            "example": {
                "structure": "first_price",
                "tie_rule": "no_winner_on_ties",
                "n": 2,
                "values": {"delta": "1", "x": 10, "origin": "0", "points": None},
                "distribution": {"pmf": ["1/11"] * 11},
                "bids": {"delta": "1", "x": 10, "origin": "0", "points": None},
            }
        },
    )

    structure: Structure = Field(..., description="Payment structure")
    tie_rule: TieRule = Field(..., description="Tie-breaking rule")
    n: int = Field(..., ge=2, description="Number of bidders")
    values: GridSpec = Field(..., description="Value grid")
    distribution: ValueDistribution = Field(..., description="Value pmf, common to all bidders")
    bids: GridSpec = Field(..., description="Bid grid")

    @model_validator(mode='after')
    def _check_sizes(self) -> 'AuctionSpec':
        if len(self.distribution.pmf) != self.values.S:
            raise ValueError(
                f"pmf has {len(self.distribution.pmf)} entries but the value grid has {self.values.S} points"
            )
        return self

    @classmethod
    def canonical_game(cls, structure: Structure, tie_rule: TieRule, n: int, x: int,
                       delta: Fraction = Fraction(1),
                       pmf: Optional[Tuple[Fraction, ...]] = None) -> 'AuctionSpec':
        """
        Build a game whose bid grid equals its value grid {0, δ, ..., xδ}.

        Args:
            structure: Payment structure
            tie_rule: Tie-breaking rule
            n: Number of bidders
            x: Maximum grid index
            delta: Step size
            pmf: Value pmf (uniform when omitted)

        Returns:
            AuctionSpec with canonical == True
        """
        grid = GridSpec(delta=delta, x=x)
        distribution = (ValueDistribution(pmf=tuple(pmf)) if pmf is not None
                        else ValueDistribution.uniform(x + 1))
        return cls(structure=structure, tie_rule=tie_rule, n=n,
                   values=grid, distribution=distribution, bids=grid)

    @property
    def canonical(self) -> bool:
        """True for games whose bid grid is the value grid {0, δ, ..., xδ}."""
        return (self.values == self.bids and self.values.regular
                and self.values.origin == 0)

    @property
    def x(self) -> int:
        return self.values.x

    @property
    def pmf(self) -> Tuple[Fraction, ...]:
        return self.distribution.pmf

    def with_delta(self, delta: Fraction) -> 'AuctionSpec':
        """Same canonical game on a rescaled grid (indices unchanged)."""
        if not self.canonical:
            raise ValueError("only canonical games can be rescaled")
        grid = GridSpec(delta=delta, x=self.x)
        return self.model_copy(update={'values': grid, 'bids': grid})

    def label(self) -> str:
        """Short human-readable label used in logs and reports."""
        return (f"{self.structure.value}/{self.tie_rule.value} n={self.n} "
                f"x={self.values.x} bids={self.bids.S}")

    def check_bidding_function(self, beta: 'BiddingFunction') -> None:
        if len(beta.bid_of) != self.values.S:
            raise ValueError(f"bidding function has {len(beta.bid_of)} entries, expected {self.values.S}")
        for v, b in enumerate(beta.bid_of):
            if not 0 <= b < self.bids.S:
                raise ValueError(f"bid index {b} at value {v} is outside the bid grid 0..{self.bids.x}")

    def check_profile(self, profile: 'StrategyProfile') -> None:
        if len(profile.players) != self.n:
            raise ValueError(f"profile has {len(profile.players)} players, game has n={self.n}")
        for beta in profile.players:
            self.check_bidding_function(beta)


class BiddingFunction(BaseModel):
    """Map from value index to bid index."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    bid_of: Tuple[int, ...] = Field(..., min_length=1, description="Bid index for each value index")

    @field_validator('bid_of')
    @classmethod
    def _non_negative(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(b < 0 for b in value):
            raise ValueError("bid indices must be non-negative")
        return value

    @classmethod
    def from_rule(cls, size: int, rule: Callable[[int], int]) -> 'BiddingFunction':
        return cls(bid_of=tuple(rule(v) for v in range(size)))

    def __len__(self) -> int:
        return len(self.bid_of)

    def __getitem__(self, v: int) -> int:
        return self.bid_of[v]

    def is_monotone(self) -> bool:
        return all(a <= b for a, b in zip(self.bid_of, self.bid_of[1:]))

    def has_no_jumps(self) -> bool:
        """True when the bid rises by at most one step per value step."""
        return all(b - a <= 1 for a, b in zip(self.bid_of, self.bid_of[1:]))

    def jumps(self) -> List[int]:
        """Values v at which β(v) - β(v-1) >= 2."""
        return [v for v in range(1, len(self.bid_of)) if self.bid_of[v] - self.bid_of[v - 1] >= 2]


class StrategyProfile(BaseModel):
    """One bidding function per player."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    players: Tuple[BiddingFunction, ...] = Field(..., min_length=1, description="Bidding function per player")

    @classmethod
    def symmetric(cls, beta: BiddingFunction, n: int) -> 'StrategyProfile':
        return cls(players=tuple(beta for _ in range(n)))

    @property
    def is_symmetric(self) -> bool:
        return all(beta == self.players[0] for beta in self.players)

    def sort_key(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(beta.bid_of for beta in self.players)


class DeviationWitness(BaseModel):
    """A strictly improving deviation certifying a non-equilibrium."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    player: int = Field(..., ge=0, description="Deviating player")
    value: int = Field(..., ge=0, description="Value index at which the deviation pays")
    bid: int = Field(..., ge=0, description="Bid index prescribed by the profile")
    deviation: int = Field(..., ge=0, description="Strictly better bid index")
    gain: Rational = Field(..., description="Exact interim payoff gain in currency units")


class EquilibriumCheck(BaseModel):
    """Verdict of an equilibrium test."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    is_equilibrium: bool = Field(..., description="True when no strictly improving deviation exists")
    witness: Optional[DeviationWitness] = Field(default=None, description="First strict improvement found")

    def __bool__(self) -> bool:
        return self.is_equilibrium
