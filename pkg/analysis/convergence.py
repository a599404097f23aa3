"""
Revenue convergence sweep.
Expected revenue of the floor(v/2) equilibrium in the two-bidder
first-price auction without ties, on ever finer grids over [0, X],
compared with the continuous benchmark X/3.
"""

import logging
from fractions import Fraction
from multiprocessing import Pool
from typing import List, Sequence

from pydantic import BaseModel, Field

from analysis.known_patterns import floor_half
from games.data_schemas import AuctionSpec, Rational, StrategyProfile, Structure, TieRule, format_rational
from games.revenue import expected_revenue

logger = logging.getLogger(__name__)


class ConvergenceRow(BaseModel):
    """Revenue on one grid."""

    delta: Rational = Field(..., description="Grid step")
    x: int = Field(..., description="Grid index of the top value X")
    revenue: Rational = Field(..., description="Exact expected revenue")
    benchmark: Rational = Field(..., description="Continuous revenue X/3")
    gap: Rational = Field(..., description="|revenue - X/3|")

    @property
    def revenue_decimal(self) -> float:
        return float(self.revenue)

    @property
    def gap_decimal(self) -> float:
        return float(self.gap)


def continuous_benchmark(top: Fraction) -> Fraction:
    """Two-bidder first-price revenue on Uniform[0, X]: E[min value] = X/3."""
    return Fraction(top) / 3


def _grid_index(top: Fraction, delta: Fraction) -> int:
    steps = Fraction(top) / Fraction(delta)
    if steps.denominator != 1 or steps < 1:
        raise ValueError(f"δ = {format_rational(delta)} does not divide X = {format_rational(top)} into whole steps")
    return int(steps)


def convergence_row(top: Fraction, delta: Fraction) -> ConvergenceRow:
    """Revenue of floor(v/2) on the grid {0, δ, ..., X}."""
    top, delta = Fraction(top), Fraction(delta)
    x = _grid_index(top, delta)
    spec = AuctionSpec.canonical_game(Structure.FIRST_PRICE, TieRule.NO_WINNER_ON_TIES, 2, x, delta=delta)
    profile = StrategyProfile.symmetric(floor_half(x + 1), 2)
    revenue = expected_revenue(spec, profile)
    benchmark = continuous_benchmark(top)
    return ConvergenceRow(delta=delta, x=x, revenue=revenue, benchmark=benchmark, gap=abs(revenue - benchmark))


def _row_task(task: tuple) -> ConvergenceRow:
    top, delta = task
    return convergence_row(top, delta)


def halving_deltas(top: Fraction, halvings: int) -> List[Fraction]:
    """X, X/2, X/4, ... (halvings + 1 entries)."""
    return [Fraction(top) / 2 ** k for k in range(halvings + 1)]


def revenue_convergence(top: Fraction, deltas: Sequence[Fraction], jobs: int = 1) -> List[ConvergenceRow]:
    """
    Revenue table along a list of grid steps.

    Args:
        top: Highest value X in currency units
        deltas: Grid steps, each dividing X
        jobs: Worker processes

    Returns:
        Rows sorted by decreasing δ
    """
    for delta in deltas:
        _grid_index(top, delta)
    tasks = [(Fraction(top), Fraction(delta)) for delta in deltas]
    if jobs > 1 and len(tasks) > 1:
        with Pool(jobs) as pool:
            rows = list(pool.imap_unordered(_row_task, tasks))
    else:
        rows = [_row_task(task) for task in tasks]
    rows.sort(key=lambda row: row.delta, reverse=True)
    for row in rows:
        logger.info(f"δ={format_rational(row.delta)}: revenue {format_rational(row.revenue)} "
                    f"(gap {row.gap_decimal:.6f})")
    return rows


def gaps_non_increasing(rows: Sequence[ConvergenceRow]) -> bool:
    """Whether the gap never grows from a grid to the grid with half its step."""
    by_delta = {row.delta: row for row in rows}
    for row in rows:
        finer = by_delta.get(row.delta / 2)
        if finer is not None and finer.gap > row.gap:
            return False
    return True
