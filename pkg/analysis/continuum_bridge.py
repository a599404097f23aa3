"""
Continuum-matching discretisation.
Builds, from a continuous auction with a strictly increasing equilibrium
bid function, a discrete no-ties game in which the continuous bids remain
an exact equilibrium, and checks that adding any single extra bid breaks
that equilibrium.
"""

import logging
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from games.data_schemas import (
    AuctionSpec,
    BiddingFunction,
    DeviationWitness,
    GridSpec,
    Rational,
    StrategyProfile,
    Structure,
    TieRule,
    ValueDistribution,
    format_rational,
)
from games.payoff_engine import engine_for, is_equilibrium

logger = logging.getLogger(__name__)


class ContinuousAuction(BaseModel):
    """
    A continuous symmetric auction given by exact evaluations.

    cdf and bid_rule are only ever evaluated at grid points, so any
    callable returning Fractions works, including table lookups.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str = Field(..., description="Human-readable description")
    structure: Structure = Field(..., description="first_price or all_pay")
    n: int = Field(..., ge=2)
    lower: Rational = Field(..., description="Lowest value v̲")
    upper: Rational = Field(..., description="Highest value v̄")
    cdf: Callable[[Fraction], Fraction] = Field(..., description="F_C, exact at grid points")
    bid_rule: Callable[[Fraction], Fraction] = Field(..., description="β_C, strictly increasing")

    @classmethod
    def uniform_first_price(cls, upper: Fraction, n: int) -> 'ContinuousAuction':
        """Uniform[0, v̄] first price: β_C(v) = (n-1)/n · v."""
        upper = Fraction(upper)
        return cls(
            name=f"first price, Uniform[0, {format_rational(upper)}], n={n}",
            structure=Structure.FIRST_PRICE, n=n, lower=Fraction(0), upper=upper,
            cdf=lambda v: v / upper,
            bid_rule=lambda v: Fraction(n - 1, n) * v,
        )

    @classmethod
    def uniform_all_pay(cls, upper: Fraction, n: int) -> 'ContinuousAuction':
        """Uniform[0, v̄] all-pay: β_C(v) = (n-1)/n · v^n / v̄^(n-1)."""
        upper = Fraction(upper)
        return cls(
            name=f"all-pay, Uniform[0, {format_rational(upper)}], n={n}",
            structure=Structure.ALL_PAY, n=n, lower=Fraction(0), upper=upper,
            cdf=lambda v: v / upper,
            bid_rule=lambda v: Fraction(n - 1, n) * v ** n / upper ** (n - 1),
        )

    @classmethod
    def from_samples(cls, name: str, structure: Structure, n: int,
                     cdf_samples: Dict[Fraction, Fraction],
                     bid_samples: Dict[Fraction, Fraction]) -> 'ContinuousAuction':
        """Auction known only through exact samples of F_C and β_C on a grid."""
        points = sorted(cdf_samples)

        def lookup(table: Dict[Fraction, Fraction], label: str) -> Callable[[Fraction], Fraction]:
            def evaluate(v: Fraction) -> Fraction:
                if v not in table:
                    raise ValueError(f"no {label} sample at {format_rational(v)}")
                return table[v]
            return evaluate

        return cls(
            name=name, structure=structure, n=n, lower=points[0], upper=points[-1],
            cdf=lookup(cdf_samples, "CDF"), bid_rule=lookup(bid_samples, "bid"),
        )


class DiscreteAnalogue(BaseModel):
    """Discrete game plus the continuous bids as a bidding function."""

    model_config = ConfigDict(frozen=True)

    spec: AuctionSpec
    candidate: BiddingFunction = Field(..., description="v ↦ β_C(v)")
    shifted: BiddingFunction = Field(..., description="v ↦ β_C(v + δ)")
    sample_points: Tuple[Rational, ...] = Field(..., description="v̲, v̲+δ, ..., v̄")


def build_discrete_analogue(cont: ContinuousAuction, delta: Fraction,
                            grid_count: Optional[int] = None) -> DiscreteAnalogue:
    """
    Discretise a continuous auction so that its bids stay an equilibrium.

    Values are v̲, v̲+δ, ..., v̄-δ, and value v carries mass
    F_C(v+δ) - F_C(v). Bids are β_C(v̲), ..., β_C(v̄). Ties are
    NoWinnerOnTies, so bidding β_C(w) beats exactly the opponents with
    value below w.

    Args:
        cont: Continuous auction
        delta: Grid step δ
        grid_count: Number of steps; must equal (v̄ - v̲)/δ when given

    Returns:
        DiscreteAnalogue with the spec and both candidate functions

    Raises:
        ValueError: On uneven division, non-increasing β_C samples or a
            value point with no mass
    """
    delta = Fraction(delta)
    if delta <= 0:
        raise ValueError(f"δ must be positive, got {format_rational(delta)}")
    steps = (cont.upper - cont.lower) / delta
    if steps.denominator != 1 or steps < 1:
        raise ValueError(f"δ = {format_rational(delta)} does not divide "
                         f"[{format_rational(cont.lower)}, {format_rational(cont.upper)}] evenly")
    if grid_count is not None and grid_count != steps:
        raise ValueError(f"grid_count {grid_count} does not match (v̄ - v̲)/δ = {steps}")
    count = int(steps)

    points = tuple(cont.lower + k * delta for k in range(count + 1))
    bids = tuple(Fraction(cont.bid_rule(p)) for p in points)
    for k in range(count):
        if bids[k] >= bids[k + 1]:
            raise ValueError(f"β_C is not strictly increasing: β_C({format_rational(points[k])}) = "
                             f"{format_rational(bids[k])} >= β_C({format_rational(points[k + 1])}) = "
                             f"{format_rational(bids[k + 1])}")
    if cont.cdf(points[0]) != 0 or cont.cdf(points[-1]) != 1:
        raise ValueError("F_C must be 0 at v̲ and 1 at v̄")

    masses = tuple(Fraction(cont.cdf(points[k + 1])) - Fraction(cont.cdf(points[k])) for k in range(count))
    for k, mass in enumerate(masses):
        if mass <= 0:
            raise ValueError(f"value {format_rational(points[k])} gets mass {format_rational(mass)}; "
                             f"F_C must be strictly increasing on the grid")

    spec = AuctionSpec(
        structure=cont.structure,
        tie_rule=TieRule.NO_WINNER_ON_TIES,
        n=cont.n,
        values=GridSpec(delta=delta, x=count - 1, origin=cont.lower),
        distribution=ValueDistribution(pmf=masses),
        bids=GridSpec(delta=delta, x=count, points=bids),
    )
    logger.debug(f"Discrete analogue of {cont.name}: {count} values, {count + 1} bids")
    return DiscreteAnalogue(
        spec=spec,
        candidate=BiddingFunction(bid_of=tuple(range(count))),
        shifted=BiddingFunction(bid_of=tuple(range(1, count + 1))),
        sample_points=points,
    )


class TightnessCheck(BaseModel):
    """Effect of inserting one bid between two adjacent bids."""

    lower_bid: Rational
    upper_bid: Rational
    inserted_bid: Rational
    breaks_equilibrium: bool = Field(..., description="The enlarged game rejects the candidate")
    downward_gain: Optional[Rational] = Field(
        default=None, description="Best gain of a value bidding upper_bid that moves down to inserted_bid"
    )
    witness: Optional[DeviationWitness] = None


class Prop5Report(BaseModel):
    """Equilibrium and tightness verdicts for a continuum-matching game."""

    game: str
    is_equilibrium: bool
    witness: Optional[DeviationWitness] = None
    tightness: List[TightnessCheck] = Field(default_factory=list)

    @property
    def tight(self) -> bool:
        return all(check.breaks_equilibrium and check.downward_gain is not None for check in self.tightness)

    @property
    def holds(self) -> bool:
        return self.is_equilibrium and self.tight


def insert_bid(spec: AuctionSpec, candidate: BiddingFunction,
               position: int) -> Tuple[AuctionSpec, BiddingFunction, Fraction]:
    """
    Add the midpoint between bids position and position + 1.

    Returns:
        (enlarged spec, candidate re-indexed to it, inserted amount)
    """
    amounts = spec.bids.amounts()
    inserted = (amounts[position] + amounts[position + 1]) / 2
    points = amounts[:position + 1] + (inserted,) + amounts[position + 1:]
    bids = GridSpec(delta=spec.bids.delta, x=spec.bids.x + 1, points=points)
    enlarged = spec.model_copy(update={'bids': bids})
    shifted = BiddingFunction(bid_of=tuple(b + 1 if b > position else b for b in candidate.bid_of))
    return enlarged, shifted, inserted


def verify_prop5(spec: AuctionSpec, candidate: BiddingFunction) -> Prop5Report:
    """
    Check the candidate and the tightness of the bid set.

    For every adjacent pair of bids whose upper bid some value uses, the
    midpoint is inserted and the candidate re-checked; it must fail, with
    a value at the upper bid gaining by moving down to the midpoint.

    Args:
        spec: Game built by build_discrete_analogue
        candidate: Symmetric bidding function to check

    Returns:
        Prop5Report
    """
    check = is_equilibrium(spec, StrategyProfile.symmetric(candidate, spec.n))
    report = Prop5Report(game=spec.label(), is_equilibrium=check.is_equilibrium, witness=check.witness)
    if not check.is_equilibrium:
        logger.info(f"✗ {spec.label()}: candidate fails at value {check.witness.value}")
        return report

    used = set(candidate.bid_of)
    amounts = spec.bids.amounts()
    checks = []
    for position in range(spec.bids.S - 1):
        if position + 1 not in used:
            continue
        enlarged, moved, inserted = insert_bid(spec, candidate, position)
        verdict = is_equilibrium(enlarged, StrategyProfile.symmetric(moved, spec.n))

        engine = engine_for(enlarged)
        weights = engine.bid_weights(moved.bid_of)
        table = engine.bid_table([weights] * (spec.n - 1))
        gains = [
            engine.payoff_units(v, position + 1, table) - engine.payoff_units(v, moved[v], table)
            for v in range(spec.values.S) if moved[v] == position + 2
        ]
        best = max(gains, default=0)
        checks.append(TightnessCheck(
            lower_bid=amounts[position],
            upper_bid=amounts[position + 1],
            inserted_bid=inserted,
            breaks_equilibrium=not verdict.is_equilibrium,
            downward_gain=engine.to_currency(best) if best > 0 else None,
            witness=verdict.witness,
        ))

    report = report.model_copy(update={'tightness': checks})
    marker = "✓" if report.holds else "✗"
    logger.info(f"{marker} {spec.label()}: equilibrium, {len(checks)} insertions, tight={report.tight}")
    return report
