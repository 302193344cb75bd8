"""
Command-line entry point.

    python -m cli optimize  --config m.yaml --out profile.yaml [--diagnose]
    python -m cli simulate  --config m.yaml --out metrics.csv [--report report.yaml]
    python -m cli nucleolus --config m.yaml
    python -m cli game      --config m.yaml

--seed, --rounds and --mechanism override the configuration. Exit status is
0 on success, 1 on a failed run, 2 on a usage error.
"""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from cli.io import emit_metrics_csv, emit_profile, emit_report, format_game, format_metrics_csv, format_profile, format_report, format_vector
from engine.bargaining import build_game
from engine.nucleolus import compute_nucleolus
from engine.registry import MECHANISM_NAMES
from optimizer.config import RunConfig, load_config
from optimizer.errors import BidOptimizerError, OutputError
from optimizer.orchestrator import market_nucleolus, optimize
from optimizer.schemas.game import CharacteristicGame, UtilityVector
from optimizer.schemas.market import Market
from sim.harness import run_simulation
from sim.report import compare_mechanisms
from sim.seeding import draw_valuations

logger = logging.getLogger("cli")


def _nonnegative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration (defaults when omitted)")
    common.add_argument("--out", help="Output path (stdout when omitted)")
    common.add_argument("--seed", type=_nonnegative_int, help="Master seed override")
    common.add_argument("--rounds", type=_positive_int, help="Simulation rounds override")
    common.add_argument("--mechanism", choices=MECHANISM_NAMES, help="Run a single mechanism")
    common.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (stderr)",
    )

    parser = argparse.ArgumentParser(prog="bidopt", description="Cooperative bid optimizer for GSP keyword auctions")
    sub = parser.add_subparsers(dest="command", required=True)

    opt = sub.add_parser("optimize", parents=[common], help="Map the market's nucleolus to a correlated bid profile")
    opt.add_argument("--diagnose", action="store_true", help="Add the unilateral-deviation report to the profile")
    simulate = sub.add_parser("simulate", parents=[common], help="Run the repeated-auction simulation")
    simulate.add_argument("--report", help="Write the mechanism comparison report to this path")
    sub.add_parser("nucleolus", parents=[common], help="Print the nucleolus of the market (or configured) game")
    sub.add_parser("game", parents=[common], help="Print ν(C) for every coalition")
    return parser


def _market(config: RunConfig) -> Market:
    valuations = draw_valuations(
        config.simulation.master_seed,
        0,
        config.market.n,
        config.valuations.base,
        config.valuations.spread,
        config.valuations.fixed,
    )
    return config.build_market(valuations)


def _game(config: RunConfig) -> CharacteristicGame:
    if config.game is not None:
        return config.game.to_game()
    return build_game(_market(config))


def _nucleolus(config: RunConfig, game: CharacteristicGame) -> UtilityVector:
    if config.game is not None:
        return compute_nucleolus(game)
    return market_nucleolus(game)


def _emit_text(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e


def _run_optimize(config: RunConfig, args: argparse.Namespace) -> None:
    grid = config.optimizer.diagnose_grid if args.diagnose else None
    run = optimize(_market(config), weighting=config.optimizer.weighting, diagnose_grid=grid, record=True)
    path = args.out or config.output.profile
    if path is None:
        sys.stdout.write(format_profile(run.mapping, run.report))
    else:
        emit_profile(run.mapping, path, run.report)
    logger.info("optimizer run %s: phases %s", run.run_id, run.trace["phases"])


def _run_simulate(config: RunConfig, args: argparse.Namespace) -> None:
    table = run_simulation(config.simulation_config())
    path = args.out or config.output.metrics
    if path is None:
        sys.stdout.write(format_metrics_csv(table))
    else:
        emit_metrics_csv(table, path)

    report_path = args.report or config.output.report
    if report_path is not None:
        report = compare_mechanisms(table)
        if report_path == "-":
            sys.stdout.write(format_report(report))
        else:
            emit_report(report, report_path)


def cli_main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        config = load_config(args.config) if args.config else RunConfig()
        config = config.with_overrides(seed=args.seed, rounds=args.rounds, mechanism=args.mechanism)
        if args.command == "optimize":
            _run_optimize(config, args)
        elif args.command == "simulate":
            _run_simulate(config, args)
        elif args.command == "nucleolus":
            game = _game(config)
            _emit_text(format_vector(_nucleolus(config, game), game.labels), args.out)
        elif args.command == "game":
            _emit_text(format_game(_game(config)), args.out)
    except BidOptimizerError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValidationError as e:
        print(f"error: invalid input: {e.errors()[0]['msg']}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(cli_main())
