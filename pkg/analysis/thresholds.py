"""
Closed-form thresholds.
Existence and non-existence thresholds for symmetric equilibria, decided
by exact big-integer inequalities. Decimal approximations are provided
for display only.
"""

import math
from enum import Enum
from fractions import Fraction
from typing import Optional

from pydantic import BaseModel, Field

from games.data_schemas import Rational


class FairTiesClass(str, Enum):
    """Known first-price fair-ties outcome classes by (n, x)."""

    N2_ODD_SE = "n2_odd_SE"
    N2_EVEN_NO_SE = "n2_even_noSE"
    N3_MULT3_NO_SE = "n3_mult3_noSE"
    N3_OTHER_SE = "n3_other_SE"
    OUTSIDE_SCOPE = "outside_scope"


def prop3_predicate(n: int, x: int) -> bool:
    """
    First-price no-ties non-existence test for n >= 3.

    x > 2^(1/(n-1)) / (2^(1/(n-1)) - 1) holds exactly when
    2·(x-1)^(n-1) > x^(n-1).

    Example:
        >>> prop3_predicate(3, 13)
        True
    """
    if n < 3:
        raise ValueError(f"the first-price no-ties threshold needs n >= 3, got n={n}")
    if x < 1:
        raise ValueError(f"x must be at least 1, got {x}")
    return 2 * (x - 1) ** (n - 1) > x ** (n - 1)


def prop3_threshold(n: int) -> float:
    """Decimal value of 2^(1/(n-1)) / (2^(1/(n-1)) - 1), for display."""
    root = 2 ** (1 / (n - 1))
    return root / (root - 1)


def s_closed_form(n: int, p: Fraction) -> Fraction:
    """
    Fair-ties win probability at a bid with i.i.d. opponents.

    Each of the n-1 opponents ties with probability p and is below
    otherwise: s(n, p) = (1 - (1 - p)^n) / (n·p).
    """
    p = Fraction(p)
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    return (1 - (1 - p) ** n) / (n * p)


def s_subset_sum(n: int, p: Fraction) -> Fraction:
    """Σ_{i=1..n} (1-p)^(n-i) · p^(i-1) · C(n-1, i-1) / i."""
    p = Fraction(p)
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    return sum(
        ((1 - p) ** (n - i) * p ** (i - 1) * math.comb(n - 1, i - 1) / i for i in range(1, n + 1)),
        Fraction(0),
    )


class GThreshold(BaseModel):
    """
    g(x) = (ln x - ln(x-1)) / (ln(x+1) - ln x).

    Kept as x itself; comparisons go through integer powers.
    """

    x: int = Field(..., ge=2)
    approx: float = Field(..., description="Decimal value, display only")

    def exceeded_by(self, m: int) -> bool:
        """m > g(x) ⇔ (x-1)·(x+1)^m > x^(m+1)."""
        return (self.x - 1) * (self.x + 1) ** m > self.x ** (m + 1)


def g_threshold(x: int) -> GThreshold:
    if x < 2:
        raise ValueError(f"g is defined for x >= 2, got {x}")
    approx = (math.log(x) - math.log(x - 1)) / (math.log(x + 1) - math.log(x))
    return GThreshold(x=x, approx=approx)


def prop4_highn_predicate(n: int, x: int) -> bool:
    """
    All-pay many-bidder condition n - 1 > g(x).

    Exact form: (x-1)·(x+1)^(n-1) > x^n.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    return g_threshold(x).exceeded_by(n - 1)


def fair_ties_class(n: int, x: int) -> FairTiesClass:
    """Which first-price fair-ties result covers (n, x), if any."""
    if n == 2:
        if x % 2 == 1:
            return FairTiesClass.N2_ODD_SE
        if x >= 10:
            return FairTiesClass.N2_EVEN_NO_SE
    if n == 3 and x >= 10:
        return FairTiesClass.N3_MULT3_NO_SE if x % 3 == 0 else FairTiesClass.N3_OTHER_SE
    return FairTiesClass.OUTSIDE_SCOPE


class ThresholdReport(BaseModel):
    """Every threshold result that speaks to one (n, x)."""

    n: int
    x: int
    prop3_threshold: Optional[float] = Field(default=None, description="Decimal threshold (n >= 3)")
    prop3_applies: Optional[bool] = Field(default=None, description="x strictly above the threshold (n >= 3)")
    prop4_applies: bool = Field(..., description="x >= 10: no all-pay symmetric equilibrium")
    prop4_highn: Optional[bool] = Field(default=None, description="n - 1 > g(x)")
    g_approx: Optional[float] = Field(default=None, description="g(x), display only")
    fair_ties_class: FairTiesClass
    s_at_uniform_tie: Optional[Rational] = Field(
        default=None, description="s(n, 1/(x+1)), the fair-ties win share when everyone ties w.p. 1/(x+1)"
    )


def threshold_report(n: int, x: int) -> ThresholdReport:
    """
    Evaluate all threshold predicates for (n, x).

    Args:
        n: Number of bidders
        x: Maximum grid index

    Returns:
        ThresholdReport (fields that do not apply are None)
    """
    report = ThresholdReport(
        n=n,
        x=x,
        prop4_applies=x >= 10,
        fair_ties_class=fair_ties_class(n, x),
        s_at_uniform_tie=s_closed_form(n, Fraction(1, x + 1)),
    )
    updates = {}
    if n >= 3 and x >= 1:
        updates['prop3_threshold'] = prop3_threshold(n)
        updates['prop3_applies'] = prop3_predicate(n, x)
    if x >= 2:
        g = g_threshold(x)
        updates['g_approx'] = g.approx
        updates['prop4_highn'] = g.exceeded_by(n - 1)
    return report.model_copy(update=updates)
