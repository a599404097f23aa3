"""
Command-line front-end for the discrete auction solver.
Parses a subcommand and its flags into a RunConfig, dispatches to the
solver and analysis modules, and writes the artifact to a file or stdout.

Exit codes: 0 success (including a certified "no equilibrium"),
1 invalid input or crash, 2 search inconclusive within its budget or cap.
"""

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from pydantic import ValidationError

from analysis.continuum_bridge import ContinuousAuction, build_discrete_analogue, verify_prop5
from analysis.convergence import gaps_non_increasing, halving_deltas, revenue_convergence
from analysis.existence_tables import run_tables
from analysis.thresholds import threshold_report
from cli.run_config import RunConfig, build_run_config
from games.data_schemas import AuctionSpec, BiddingFunction, StrategyProfile, Structure, format_rational
from games.payoff_engine import best_response_set, is_equilibrium, opponent_bid_pmf
from generators.report_generator import ReportGenerator, write_artifact
from solvers import SolverInvariantError
from solvers.asymmetric import construct_asymmetric_fp3, export_figure1_data
from solvers.dominance import (
    iterate_strict_dominance,
    reduce_game,
    round1_weak_dominance,
    strategy_count,
    unreduced_strategy_count,
)
from solvers.enumerator import enumerate_pure_equilibria
from solvers.result_schemas import VerifyReport
from solvers.symmetric_solver import solve_symmetric

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INCONCLUSIVE = 2

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(verbose: bool = False) -> None:
    """Log to stderr; stdout carries the artifacts."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)],
    )


def banner(title: str) -> None:
    logger.info("=" * 70)
    logger.info(title)
    logger.info("=" * 70)


def _unsupported(config: RunConfig) -> None:
    raise ValueError(f"format {config.output_format} is not available for {config.command}")


def _json(payload: Any) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


# ----------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    """
    Parser with one subcommand per experiment.

    Every flag defaults to SUPPRESS, so the parsed namespace holds only
    the flags given explicitly; those override config file values.
    """
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument('--config', help="Flat JSON config file; explicit flags override it")
    common.add_argument('--verbose', '-v', action='store_true', help="Debug logging")
    common.add_argument('--output', '-o', help="Artifact path (default: stdout)")
    common.add_argument('--format', choices=['json', 'csv', 'markdown'], help="Artifact format")
    common.add_argument('--jobs', type=int, help="Worker processes (default: all cores)")

    game = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    game.add_argument('--structure', help="fp, sp or ap")
    game.add_argument('--tie-rule', '--ties', dest='tie_rule', help="fair or none")
    game.add_argument('--n', type=int, help="Number of bidders")
    game.add_argument('--x', type=int, help="Maximum value index (S = x + 1 values)")
    game.add_argument('--delta', help="Grid step as 'p/q'")
    game.add_argument('--pmf', help="Comma-separated value pmf as 'p/q' entries")

    search = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    search.add_argument('--scope', help="monotone or full")
    search.add_argument('--budget', type=int, help="Node budget")
    search.add_argument('--exact-budget', type=int, help="Opponent profile budget for exact dominance checks")
    search.add_argument('--no-prune', dest='prune', action='store_false', help="Disable symmetric DFS pruning")
    search.add_argument('--cap', type=int, help="Largest x searched exhaustively by the symmetric solver")
    search.add_argument('--collapse', action='store_true', help="List permutation-equivalent profiles once")
    search.add_argument('--stop-at-first', action='store_true', help="Stop at the first equilibrium")

    parser = argparse.ArgumentParser(
        prog='discrete-auctions',
        description="Exact pure-strategy equilibrium solver for discrete auctions",
    )
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
    subparsers.required = True

    def add(name: str, help_text: str, *parents: argparse.ArgumentParser) -> argparse.ArgumentParser:
        return subparsers.add_parser(name, help=help_text, parents=[common, *parents],
                                     argument_default=argparse.SUPPRESS)

    add('describe', "Game summary, strategy counts and thresholds", game, search)
    add('reduce', "Dominance reduction with its deletion trace", game, search)
    add('solve-symmetric', "All symmetric pure equilibria", game, search)
    add('enumerate', "All pure equilibria after dominance reduction", game, search)

    verify = add('verify', "Check one profile", game)
    verify.add_argument('--profile', help="JSON file or 'b,b,...;b,b,...' with one group per player")
    verify.add_argument('--beta', help="Comma-separated symmetric bidding function")

    tables = add('tables', "Recompute the existence tables", search)
    tables.add_argument('--which', help="Comma-separated table numbers (1: with ties, 2: without)")
    tables.add_argument('--no-blank', dest='include_blank', action='store_false',
                        help="Skip cells printed as '-'")

    add('asym-fp3', "Verified asymmetric three-bidder first-price profile", game)

    prop5 = add('prop5', "Continuum-matching discretisation and tightness check", game)
    prop5.add_argument('--upper', help="Highest continuous value")
    prop5.add_argument('--grid-count', type=int, help="Grid steps on [0, upper]")

    converge = add('converge', "Revenue along halving grid steps")
    converge.add_argument('--top', help="Highest value X")
    converge.add_argument('--deltas', help="Comma-separated grid steps")
    converge.add_argument('--halvings', type=int, help="Number of halvings of X when --deltas is absent")

    thresholds = add('thresholds', "Closed-form thresholds over a range of n and x", game)
    thresholds.add_argument('--n-max', type=int, help="Largest n (default: --n)")
    thresholds.add_argument('--x-max', type=int, help="Largest x (default: --x)")

    return parser


# ----------------------------------------------------------------------
# Subcommands


def cmd_describe(config: RunConfig, generator: ReportGenerator) -> int:
    spec = config.auction_spec()
    round1 = round1_weak_dominance(spec)
    reduced = iterate_strict_dominance(spec, round1, config.exact_budget)
    counts: Dict[str, Optional[int]] = {
        'unreduced': unreduced_strategy_count(spec),
        'round1': strategy_count(round1),
        'round1_monotone': strategy_count(round1, monotone=True),
        'reduced': strategy_count(reduced),
        'reduced_monotone': strategy_count(reduced, monotone=True),
    }
    thresholds = threshold_report(spec.n, spec.x)

    if config.output_format == 'markdown':
        text = generator.render_describe(spec, counts, thresholds)
    elif config.output_format == 'json':
        text = _json({
            'spec': spec.model_dump(mode='json'),
            'counts': counts,
            'thresholds': thresholds.model_dump(mode='json'),
        })
    else:
        _unsupported(config)
    write_artifact(text, config.output)
    return EXIT_OK


def cmd_reduce(config: RunConfig, generator: ReportGenerator) -> int:
    spec = config.auction_spec()
    round1 = round1_weak_dominance(spec)
    reduced = iterate_strict_dominance(spec, round1, config.exact_budget)
    logger.info(f"✓ {spec.label()}: {strategy_count(reduced)} bidding functions per player survive")
    for downgrade in reduced.downgrades:
        logger.warning(f"Player {downgrade.player}, round {downgrade.round}: {downgrade.profile_count} "
                       f"opponent profiles exceed the exact budget {downgrade.budget}; bounds only")

    if config.output_format == 'json':
        text = reduced.model_dump_json(indent=2) + "\n"
    elif config.output_format == 'markdown':
        text = generator.render_reduce_trace(spec, round1, reduced)
    else:
        _unsupported(config)
    write_artifact(text, config.output)
    return EXIT_OK


def cmd_solve_symmetric(config: RunConfig, generator: ReportGenerator) -> int:
    spec = config.auction_spec()
    report = solve_symmetric(spec, prune=config.prune, cap=config.cap)
    marker = "✗" if report.inconclusive else "✓"
    logger.info(f"{marker} {report.game}: {len(report.equilibria)} symmetric equilibria "
                f"({report.certificate.value})")

    if config.output_format == 'json':
        text = report.model_dump_json(indent=2) + "\n"
    elif config.output_format == 'csv':
        text = generator.bidding_functions_csv(report.equilibria, spec)
    else:
        text = generator.render_symmetric(report)
    write_artifact(text, config.output)
    return EXIT_INCONCLUSIVE if report.inconclusive else EXIT_OK


def cmd_enumerate(config: RunConfig, generator: ReportGenerator) -> int:
    spec = config.auction_spec()
    reduced = reduce_game(spec, config.exact_budget)
    result = enumerate_pure_equilibria(spec, reduced, scope=config.scope, budget=config.budget,
                                       jobs=config.jobs, stop_at_first=config.stop_at_first,
                                       collapse=config.collapse)
    marker = "✗" if result.inconclusive else "✓"
    logger.info(f"{marker} {result.game}: {len(result.equilibria)} equilibria ({result.status.value}, "
                f"{result.search_stats.nodes} nodes)")

    if config.output_format == 'json':
        text = result.model_dump_json(indent=2) + "\n"
    elif config.output_format == 'csv':
        functions = [beta for profile in result.equilibria for beta in profile.players]
        text = generator.bidding_functions_csv(functions, spec)
    else:
        text = generator.render_enumeration(result)
    write_artifact(text, config.output)
    return EXIT_INCONCLUSIVE if result.inconclusive else EXIT_OK


def parse_profile(config: RunConfig, spec: AuctionSpec) -> StrategyProfile:
    """
    Profile named by --profile or --beta.

    Raises:
        ValueError: If neither is given or the profile does not fit the game
    """
    if config.beta is not None:
        profile = StrategyProfile.symmetric(BiddingFunction(bid_of=config.beta), spec.n)
    elif config.profile is not None:
        path = Path(config.profile)
        if path.suffix == '.json' or path.is_file():
            profile = StrategyProfile.model_validate_json(path.read_text(encoding='utf-8'))
        else:
            players = []
            for group in config.profile.split(';'):
                try:
                    bids = tuple(int(b) for b in group.replace(' ', '').split(',') if b)
                except ValueError as e:
                    raise ValueError(f"profile entries must be bid indices: {group!r}") from e
                players.append(BiddingFunction(bid_of=bids))
            profile = StrategyProfile(players=tuple(players))
    else:
        raise ValueError("verify needs --profile or --beta")
    spec.check_profile(profile)
    return profile


def failing_best_responses(spec: AuctionSpec, profile: StrategyProfile) -> List[tuple]:
    """(player, value, argmax set) for every value whose bid is not a best response."""
    failures = []
    for player, beta in enumerate(profile.players):
        opp_pmfs = opponent_bid_pmf(spec, profile, player)
        for v in range(spec.values.S):
            argmax = best_response_set(spec, player, v, opp_pmfs)
            if beta[v] not in argmax:
                failures.append((player, v, argmax))
        if profile.is_symmetric:
            break
    return failures


def cmd_verify(config: RunConfig, generator: ReportGenerator) -> int:
    spec = config.auction_spec()
    profile = parse_profile(config, spec)
    check = is_equilibrium(spec, profile)
    report = VerifyReport(
        game=spec.label(),
        is_equilibrium=check.is_equilibrium,
        witness=check.witness,
        failing_best_responses=[] if check.is_equilibrium else failing_best_responses(spec, profile),
    )
    marker = "✓" if report.is_equilibrium else "✗"
    logger.info(f"{marker} {report.game}: equilibrium = {report.is_equilibrium}")

    if config.output_format == 'json':
        text = report.model_dump_json(indent=2) + "\n"
    elif config.output_format == 'csv':
        text = generator.bidding_functions_csv(list(profile.players), spec)
    else:
        _unsupported(config)
    write_artifact(text, config.output)
    return EXIT_OK


def cmd_tables(config: RunConfig, generator: ReportGenerator) -> int:
    report = run_tables(config.which, jobs=config.jobs, include_blank=config.include_blank,
                        budget=config.budget)
    if config.output_format == 'markdown':
        text = generator.render_tables(report)
    elif config.output_format == 'csv':
        text = generator.tables_csv(report)
    else:
        text = report.model_dump_json(indent=2) + "\n"
    write_artifact(text, config.output)
    return EXIT_INCONCLUSIVE if report.inconclusive else EXIT_OK


def cmd_asym_fp3(config: RunConfig, generator: ReportGenerator) -> int:
    profile = construct_asymmetric_fp3(config.x)
    rows = export_figure1_data(profile)
    distance = max(row.max_distance() for row in rows)
    logger.info(f"Largest distance from 2v/3: {format_rational(distance)} grid units")

    if config.output_format == 'csv':
        text = generator.asymmetric_csv(rows)
    elif config.output_format == 'json':
        text = _json({
            'x': config.x,
            'profile': profile.model_dump(mode='json'),
            'max_distance': format_rational(distance),
        })
    else:
        _unsupported(config)
    write_artifact(text, config.output)
    return EXIT_OK


def cmd_prop5(config: RunConfig, generator: ReportGenerator) -> int:
    upper = Fraction(config.upper)
    if config.structure == Structure.FIRST_PRICE:
        cont = ContinuousAuction.uniform_first_price(upper, config.n)
    elif config.structure == Structure.ALL_PAY:
        cont = ContinuousAuction.uniform_all_pay(upper, config.n)
    else:
        raise ValueError("prop5 supports first_price and all_pay")
    delta = upper / config.grid_count if config.grid_count else Fraction(config.delta)

    analogue = build_discrete_analogue(cont, delta, config.grid_count)
    report = verify_prop5(analogue.spec, analogue.candidate)
    shifted = verify_prop5(analogue.spec, analogue.shifted)

    if config.output_format == 'markdown':
        text = generator.render_prop5(cont.name, report, shifted)
    elif config.output_format == 'json':
        text = _json({
            'candidate': report.model_dump(mode='json'),
            'shifted': shifted.model_dump(mode='json'),
            'holds': report.holds,
        })
    else:
        text = generator.bidding_functions_csv([analogue.candidate, analogue.shifted], analogue.spec)
    write_artifact(text, config.output)
    return EXIT_OK


def cmd_converge(config: RunConfig, generator: ReportGenerator) -> int:
    top = Fraction(config.top)
    deltas = list(config.deltas) if config.deltas else halving_deltas(top, config.halvings)
    rows = revenue_convergence(top, deltas, jobs=config.jobs)
    if gaps_non_increasing(rows):
        logger.info("✓ Revenue gap never grows when δ halves")
    else:
        logger.warning("✗ Revenue gap grows along a halving of δ")

    if config.output_format == 'csv':
        text = generator.convergence_csv(rows)
    elif config.output_format == 'markdown':
        text = generator.render_convergence(top, rows)
    else:
        text = _json([row.model_dump(mode='json') for row in rows])
    write_artifact(text, config.output)
    return EXIT_OK


def cmd_thresholds(config: RunConfig, generator: ReportGenerator) -> int:
    reports = [threshold_report(n, x) for n in config.n_values() for x in config.x_values()]
    if config.output_format == 'csv':
        text = generator.thresholds_csv(reports)
    elif config.output_format == 'json':
        text = _json([report.model_dump(mode='json') for report in reports])
    else:
        _unsupported(config)
    write_artifact(text, config.output)
    return EXIT_OK


HANDLERS: Dict[str, Callable[[RunConfig, ReportGenerator], int]] = {
    'describe': cmd_describe,
    'reduce': cmd_reduce,
    'solve-symmetric': cmd_solve_symmetric,
    'enumerate': cmd_enumerate,
    'verify': cmd_verify,
    'tables': cmd_tables,
    'asym-fp3': cmd_asym_fp3,
    'prop5': cmd_prop5,
    'converge': cmd_converge,
    'thresholds': cmd_thresholds,
}


def report_validation_error(error: ValidationError) -> None:
    for detail in error.errors():
        location = '.'.join(str(part) for part in detail['loc']) or '<config>'
        print(f"invalid {location}: {detail['msg']}", file=sys.stderr)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    Args:
        argv: Arguments without the program name (default: sys.argv[1:])

    Returns:
        Process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INVALID

    flags = vars(args)
    command = flags.pop('command')
    config_path = flags.pop('config', None)
    verbose = flags.pop('verbose', False)
    setup_logging(verbose)

    try:
        config = build_run_config(command, flags, config_path)
        banner(f"discrete-auctions {command}")
        code = HANDLERS[command](config, ReportGenerator())
    except ValidationError as e:
        report_validation_error(e)
        return EXIT_INVALID
    except (ValueError, OSError, SolverInvariantError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as e:
        logger.error(f"{command} crashed: {e}", exc_info=True)
        return EXIT_INVALID

    logger.info(f"{'✓' if code == EXIT_OK else '✗'} {command} finished with exit code {code}")
    return code
