"""
Report generator for discrete auction results.
Renders Markdown and text reports from Jinja2 templates and writes CSV
tables for bidding functions, figure data and convergence sweeps.
"""

import csv
import io
import logging
import os
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

from jinja2 import Environment, FileSystemLoader

from analysis.continuum_bridge import Prop5Report
from analysis.convergence import ConvergenceRow, gaps_non_increasing
from analysis.existence_tables import COLUMN_TITLES, TABLE_TITLES, CellStatus, TablesReport
from analysis.thresholds import ThresholdReport
from games.data_schemas import AuctionSpec, BiddingFunction, format_rational
from solvers.asymmetric import AsymmetricRow
from solvers.dominance import strategy_count, unreduced_strategy_count
from solvers.result_schemas import EnumerationResult, ReducedGame, SymmetricSolveReport

logger = logging.getLogger(__name__)

TEMPLATE_DIR = Path(__file__).parent / 'templates'


def format_decimal(value: Fraction, places: int = 6) -> str:
    """Decimal rendering of an exact value, for display next to "p/q"."""
    return f"{float(value):.{places}f}"


def bids_as_text(beta: BiddingFunction) -> str:
    return "(" + ",".join(str(b) for b in beta.bid_of) + ")"


class ReportGenerator:
    """
    Render solver results as Markdown, plain text and CSV.
    """

    def __init__(self, template_dir: Optional[str] = None):
        """
        Initialize report generator.

        Args:
            template_dir: Directory containing Jinja2 templates
        """
        self.template_dir = str(template_dir or TEMPLATE_DIR)
        self.env = Environment(
            loader=FileSystemLoader(self.template_dir),
            trim_blocks=True,
            lstrip_blocks=True,
        )
        self.env.filters['rational'] = format_rational
        self.env.filters['decimal'] = format_decimal

    def _render(self, template_name: str, **context) -> str:
        return self.env.get_template(template_name).render(**context)

    # ------------------------------------------------------------------
    # Markdown / text

    def render_tables(self, report: TablesReport) -> str:
        cells = report.cells()
        return self._render(
            'tables.md.j2',
            grids=[(table, report.grid(table)) for table in sorted(report.tables)],
            titles=TABLE_TITLES,
            column_titles=COLUMN_TITLES,
            discrepancies=[c for c in cells if c.status == CellStatus.DISCREPANCY],
            new_findings=[c for c in cells if c.status == CellStatus.NEW_FINDING],
        )

    def render_reduce_trace(self, spec: AuctionSpec, round1: ReducedGame, reduced: ReducedGame) -> str:
        """
        Human-readable dominance trace.

        Args:
            spec: Game
            round1: Reduced game after round 1
            reduced: Reduced game at the strict-dominance fixed point
        """
        return self._render(
            'reduce_trace.txt.j2',
            game=spec.label(),
            before=unreduced_strategy_count(spec),
            after_round1=strategy_count(round1),
            after=strategy_count(reduced),
            monotone_after=strategy_count(reduced, monotone=True),
            players=[{'index': i, 'allowed': row} for i, row in enumerate(reduced.allowed)],
            round1_deletions=sum(1 for d in reduced.trace if d.round == 1),
            strict_deletions=[d for d in reduced.trace if d.round >= 2],
            downgrades=reduced.downgrades,
        )

    def render_symmetric(self, report: SymmetricSolveReport) -> str:
        notes = list(report.notes)
        for record in report.branch_log:
            notes.append(f"β(1) = {record.bid_at_one}: {record.equilibria} equilibria")
        return self._render(
            'equilibria.md.j2',
            title="Symmetric equilibria",
            game=report.game,
            status=report.certificate.value,
            reference=report.reference,
            stats=report.stats if report.stats.nodes else None,
            headers=["β"],
            rows=[[bids_as_text(beta)] for beta in report.equilibria],
            notes=notes,
        )

    def render_enumeration(self, result: EnumerationResult) -> str:
        n = len(result.equilibria[0].players) if result.equilibria else 0
        notes = []
        if result.collapsed:
            notes.append("profiles that are permutations of each other are listed once")
        if result.stopped_at_first:
            notes.append("search stopped at the first equilibrium")
        return self._render(
            'equilibria.md.j2',
            title="Pure-strategy equilibria",
            game=result.game,
            status=f"{result.status.value} ({result.scope.value})",
            reference=None,
            stats=result.search_stats,
            headers=[f"player {i}" for i in range(n)],
            rows=[[bids_as_text(beta) for beta in profile.players] for profile in result.equilibria],
            notes=notes,
        )

    def render_describe(self, spec: AuctionSpec, counts: Dict[str, Optional[int]],
                        thresholds: ThresholdReport) -> str:
        return self._render(
            'describe.md.j2',
            game=spec.label(),
            spec=spec,
            values=[format_rational(a) for a in spec.values.amounts()],
            pmf=[format_rational(p) for p in spec.pmf],
            bids=[format_rational(a) for a in spec.bids.amounts()],
            counts=counts,
            thresholds=thresholds,
        )

    def render_prop5(self, title: str, report: Prop5Report, shifted: Optional[Prop5Report] = None) -> str:
        return self._render('prop5.md.j2', title=title, report=report, shifted=shifted)

    def render_convergence(self, top: Fraction, rows: Sequence[ConvergenceRow]) -> str:
        return self._render('convergence.md.j2', top=format_rational(top), rows=rows,
                            monotone_gap=gaps_non_increasing(rows))

    # ------------------------------------------------------------------
    # CSV

    @staticmethod
    def _csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)
        return buffer.getvalue()

    def bidding_functions_csv(self, functions: Sequence[BiddingFunction], spec: AuctionSpec) -> str:
        """One row per value: value index, value amount, then each function's bid amount."""
        rows = []
        for v in range(spec.values.S):
            row: List[str] = [str(v), format_rational(spec.values.amount(v))]
            row.extend(format_rational(spec.bids.amount(beta[v])) for beta in functions)
            rows.append(row)
        header = ['value_index', 'value'] + [f'beta_{k}' for k in range(len(functions))]
        return self._csv(header, rows)

    def asymmetric_csv(self, rows: Sequence[AsymmetricRow]) -> str:
        bidders = len(rows[0].bids) if rows else 0
        header = ['value'] + [f'bidder_{i + 1}' for i in range(bidders)] + ['reference_2v_over_3']
        return self._csv(header, ([row.value, *row.bids, format_rational(row.reference)] for row in rows))

    def convergence_csv(self, rows: Sequence[ConvergenceRow]) -> str:
        header = ['delta', 'x', 'revenue', 'revenue_decimal', 'gap', 'gap_decimal']
        return self._csv(header, (
            [format_rational(r.delta), r.x, format_rational(r.revenue), format_decimal(r.revenue),
             format_rational(r.gap), format_decimal(r.gap)]
            for r in rows
        ))

    def tables_csv(self, report: TablesReport) -> str:
        header = ['table', 'valuations', 'column', 'printed', 'computed', 'status', 'nodes']
        return self._csv(header, (
            [c.table, c.valuations, COLUMN_TITLES[c.column], c.printed, c.computed_label, c.status.value, c.nodes]
            for c in report.cells()
        ))

    def thresholds_csv(self, reports: Sequence[ThresholdReport]) -> str:
        header = ['n', 'x', 'prop3_threshold', 'prop3_applies', 'prop4_applies', 'prop4_highn',
                  'g_approx', 'fair_ties_class', 's_uniform_tie', 's_uniform_tie_decimal']
        return self._csv(header, (
            [r.n, r.x, r.prop3_threshold, r.prop3_applies, r.prop4_applies, r.prop4_highn,
             r.g_approx, r.fair_ties_class.value, format_rational(r.s_at_uniform_tie),
             format_decimal(r.s_at_uniform_tie)]
            for r in reports
        ))


def write_artifact(text: str, output: Optional[str] = None) -> None:
    """
    Write an artifact to a file, or to stdout when no path is given.

    Args:
        text: Rendered artifact
        output: Destination path
    """
    if output is None:
        print(text, end='' if text.endswith('\n') else '\n')
        return
    directory = os.path.dirname(output)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(output, 'w', encoding='utf-8') as f:
        f.write(text)
    logger.info(f"Wrote {output}")
