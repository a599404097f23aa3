"""
Existence tables.
Printed Yes/No/- grids for pure-strategy equilibrium existence with and
without fair ties, and the runner that recomputes each cell with
dominance reduction followed by exhaustive enumeration.
"""

import logging
import time
from enum import Enum
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, Field

from games.data_schemas import AuctionSpec, Structure, TieRule
from solvers.dominance import reduce_game
from solvers.enumerator import enumerate_pure_equilibria

logger = logging.getLogger(__name__)

COLUMNS: Tuple[Tuple[Structure, int], ...] = (
    (Structure.FIRST_PRICE, 2),
    (Structure.FIRST_PRICE, 3),
    (Structure.ALL_PAY, 2),
    (Structure.ALL_PAY, 3),
)

COLUMN_TITLES = ("FPSB, n = 2", "FPSB, n = 3", "All-pay, n = 2", "All-pay, n = 3")

VALUATIONS = (6, 7, 8, 9, 10)

# Printed cells, row per number of valuations S (= x + 1), column order as COLUMNS.
PRINTED: Dict[int, Dict[int, Tuple[str, ...]]] = {
    1: {
        6: ("-", "Yes", "Yes", "No"),
        7: ("-", "No", "No", "No"),
        8: ("-", "Yes", "No", "-"),
        9: ("-", "-", "Yes", "-"),
        10: ("No", "-", "-", "-"),
    },
    2: {
        6: ("-", "Yes", "Yes", "Yes"),
        7: ("-", "Yes", "No", "No"),
        8: ("-", "-", "No", "-"),
        9: ("-", "-", "Yes", "-"),
        10: ("-", "-", "-", "-"),
    },
}

TIE_RULES = {1: TieRule.FAIR_TIES, 2: TieRule.NO_WINNER_ON_TIES}
TABLE_TITLES = {
    1: "The existence of pure-strategy equilibria in the model with ties",
    2: "The existence of pure-strategy equilibria in the model without ties",
}

# Printed cells contradicted by a verified equilibrium: FPSB n = 2 with ties
# at S = 10 has β(v) = floor(v/2), an equilibrium for every odd x.
KNOWN_DISCREPANCIES = {(1, 10, 0)}


class CellStatus(str, Enum):
    MATCH = "match"
    DISCREPANCY = "discrepancy"
    NEW_FINDING = "new_finding"
    INCONCLUSIVE = "inconclusive"
    NOT_RUN = "not_run"


class TableCell(BaseModel):
    """One (table, S, column) entry, printed and computed."""

    table: int = Field(..., ge=1, le=2)
    valuations: int = Field(..., description="S = x + 1")
    column: int = Field(..., ge=0, le=3)
    structure: Structure
    n: int
    printed: str = Field(..., description="Yes, No or -")
    computed: Optional[bool] = Field(default=None, description="Equilibrium found (None when not decided)")
    status: CellStatus = CellStatus.NOT_RUN
    nodes: int = 0
    seconds: float = 0.0

    @property
    def computed_label(self) -> str:
        if self.computed is None:
            return "?"
        return "Yes" if self.computed else "No"

    @property
    def display(self) -> str:
        """Cell text for the rendered grid."""
        if self.status == CellStatus.MATCH:
            return self.printed
        if self.status == CellStatus.DISCREPANCY:
            return f"{self.computed_label} (printed {self.printed})"
        if self.status == CellStatus.NEW_FINDING:
            return f"{self.computed_label}*"
        if self.status == CellStatus.INCONCLUSIVE:
            return "?"
        return self.printed


class TablesReport(BaseModel):
    tables: Dict[int, List[TableCell]] = Field(default_factory=dict)

    def cells(self) -> List[TableCell]:
        return [cell for table in sorted(self.tables) for cell in self.tables[table]]

    @property
    def inconclusive(self) -> bool:
        return any(cell.status == CellStatus.INCONCLUSIVE for cell in self.cells()
                   if cell.printed != "-")

    def grid(self, table: int) -> List[Tuple[int, List[TableCell]]]:
        rows: Dict[int, List[TableCell]] = {}
        for cell in self.tables.get(table, []):
            rows.setdefault(cell.valuations, []).append(cell)
        return [(s, sorted(rows[s], key=lambda c: c.column)) for s in sorted(rows)]


def table_spec(table: int, valuations: int, column: int) -> AuctionSpec:
    structure, n = COLUMNS[column]
    return AuctionSpec.canonical_game(structure, TIE_RULES[table], n, valuations - 1)


def printed_cells(which: Sequence[int]) -> List[TableCell]:
    cells = []
    for table in which:
        for valuations in VALUATIONS:
            for column, printed in enumerate(PRINTED[table][valuations]):
                structure, n = COLUMNS[column]
                cells.append(TableCell(table=table, valuations=valuations, column=column,
                                       structure=structure, n=n, printed=printed))
    return cells


def compute_cell(cell: TableCell, budget: Optional[int] = None) -> TableCell:
    """Reduce and enumerate one cell's game, stopping at the first equilibrium."""
    started = time.perf_counter()
    spec = table_spec(cell.table, cell.valuations, cell.column)
    reduced = reduce_game(spec)
    result = enumerate_pure_equilibria(spec, reduced, budget=budget, stop_at_first=True)
    elapsed = time.perf_counter() - started

    if result.inconclusive:
        return cell.model_copy(update={'status': CellStatus.INCONCLUSIVE,
                                       'nodes': result.search_stats.nodes, 'seconds': elapsed})
    computed = result.exists
    if cell.printed == "-":
        status = CellStatus.NEW_FINDING
    elif (cell.printed == "Yes") == computed:
        status = CellStatus.MATCH
    else:
        status = CellStatus.DISCREPANCY
    return cell.model_copy(update={'computed': computed, 'status': status,
                                   'nodes': result.search_stats.nodes, 'seconds': elapsed})


def _cell_task(task: tuple) -> TableCell:
    cell, budget = task
    return compute_cell(cell, budget)


class TableRunner:
    """Recomputes the existence grids."""

    # Blank cells are only attempted within this node budget
    BLANK_CELL_BUDGET = 200_000

    def __init__(self, which: Sequence[int] = (1, 2), jobs: int = 1, include_blank: bool = True,
                 budget: Optional[int] = None):
        for table in which:
            if table not in PRINTED:
                raise ValueError(f"unknown table {table}; choose from {sorted(PRINTED)}")
        self.which = tuple(which)
        self.jobs = max(1, jobs)
        self.include_blank = include_blank
        self.budget = budget

    def run(self) -> TablesReport:
        cells = printed_cells(self.which)
        tasks = []
        skipped = []
        for cell in cells:
            if cell.printed == "-":
                if self.include_blank:
                    tasks.append((cell, self.BLANK_CELL_BUDGET))
                else:
                    skipped.append(cell)
            else:
                tasks.append((cell, self.budget))

        logger.info(f"Computing {len(tasks)} table cells with {self.jobs} job(s)")
        if self.jobs > 1:
            with Pool(self.jobs) as pool:
                done = list(pool.imap_unordered(_cell_task, tasks))
        else:
            done = [_cell_task(task) for task in tasks]

        report = TablesReport()
        for cell in sorted(done + skipped, key=lambda c: (c.table, c.valuations, c.column)):
            report.tables.setdefault(cell.table, []).append(cell)
            if cell.status == CellStatus.DISCREPANCY:
                known = (cell.table, cell.valuations, cell.column) in KNOWN_DISCREPANCIES
                logger.warning(f"✗ Table {cell.table}, S={cell.valuations}, {COLUMN_TITLES[cell.column]}: "
                               f"printed {cell.printed}, computed {cell.computed_label}"
                               f"{' (known)' if known else ''}")
        return report


def run_tables(which: Sequence[int] = (1, 2), jobs: int = 1, include_blank: bool = True,
               budget: Optional[int] = None) -> TablesReport:
    """
    Recompute the existence tables.

    Args:
        which: Table numbers (1: fair ties, 2: no ties)
        jobs: Worker processes, one cell per task
        include_blank: Also attempt the cells printed as "-"
        budget: Node budget for printed cells

    Returns:
        TablesReport with a status per cell
    """
    return TableRunner(which, jobs, include_blank, budget).run()
