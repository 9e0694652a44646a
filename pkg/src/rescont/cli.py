import argparse
import logging
import sys
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from rescont._version import __version__
from rescont.branch import BranchCollector
from rescont.checks import run_checks
from rescont.config import RunConfig, SolverConfig, load_run_config, load_solver_config
from rescont.continuation import trace_branch
from rescont.exceptions import ConfigError, NumericalError
from rescont.exporter import CSVExporter, format_root, get_exporter
from rescont.rootfinding import RootResult, newton_complex, scan_bound_states
from rescont.scattering import determinant_map

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rescont",
        description="Bound states and resonances of coupled-channel potentials "
        "by continuation of the regularized S-matrix determinant.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("roots", "find bound states at the configured strength"),
        ("continue", "trace bound states and resonances in the continuation strength"),
        ("check", "run unitarity, symmetry and oracle checks"),
        ("map", "tabulate |det S| and |det F| on a rectangle of the k-plane"),
    ):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", required=True, type=Path, help="run configuration (TOML)")
        sub.add_argument("--output", type=Path, default=None, help="CSV output path")
        sub.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    return parser


def _configure_logging(solver: SolverConfig, verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else solver.log_level.upper(),
        format="%(asctime)s %(name)s %(levelname)s: %(message)s",
        stream=sys.stderr,
    )


def _find_roots(config: RunConfig, solver: SolverConfig) -> list[RootResult]:
    model, grid = config.model(), config.grid()
    if config.starts is None:
        return scan_bound_states(
            model,
            config.lambda0,
            config.k_max,
            grid,
            tol=config.newton_tol,
            max_iter=config.newton_max_iter,
            workers=solver.workers,
        )
    return [
        newton_complex(model, config.lambda0, k0, grid, config.newton_tol, config.newton_max_iter)
        for k0 in config.starts
    ]


def cmd_roots(config: RunConfig, solver: SolverConfig, output: Path | None = None) -> int:
    roots = _find_roots(config, solver)
    for root in roots:
        print(format_root(root.k))
    if output is not None:
        CSVExporter(output, solver.csv_digits).export_roots(roots)
    if solver.output_format == "console":
        get_exporter("console").export_roots(roots)
    return EXIT_OK


def cmd_continue(config: RunConfig, solver: SolverConfig, output: Path | None = None) -> int:
    model, grid = config.model(), config.grid()
    options = config.continuation_options()
    roots = _find_roots(config, solver)
    tasks = [(root, direction) for root in roots for direction in config.directions]
    logger.info(f"Tracing {len(tasks)} branch(es) from {len(roots)} start(s)")

    def run(task: tuple[RootResult, int]) -> BranchCollector:
        root, direction = task
        collector = BranchCollector()
        try:
            trace_branch(
                model,
                root,
                config.lambda0,
                direction,
                config.lambda_bounds,
                grid,
                options,
                collector,
            )
        except NumericalError as e:
            logger.error(f"Branch from k={root.k:.7g} (direction {direction:+d}) failed: {e}")
        return collector

    if solver.workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=solver.workers) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(task) for task in tasks]

    merged = BranchCollector()
    for collector in results:
        merged.absorb(collector)

    if solver.output_format == "csv" or output is not None:
        CSVExporter(output, solver.csv_digits).export_branches(merged.branches)
    if solver.output_format == "console":
        get_exporter("console").export_branches(merged.branches)
    return EXIT_OK


def cmd_check(config: RunConfig, solver: SolverConfig, output: Path | None = None) -> int:
    try:
        roots = _find_roots(config, solver)
    except NumericalError as e:
        logger.warning(f"Root search failed, oracle checks run without roots: {e}")
        roots = []
    results = run_checks(config, roots)
    for result in results:
        print(result)
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_map(config: RunConfig, solver: SolverConfig, output: Path | None = None) -> int:
    re_k, im_k = config.map_axes()
    logger.info(
        f"Mapping {re_k.size} x {im_k.size} points, "
        f"Re k in {config.map_re}, Im k in {config.map_im}"
    )
    values = determinant_map(
        config.model(), config.lambda0, re_k, im_k, config.grid(), workers=solver.workers
    )
    CSVExporter(output, solver.csv_digits).export_map(values)
    return EXIT_OK

COMMANDS = {"roots": cmd_roots, "continue": cmd_continue, "check": cmd_check, "map": cmd_map}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        solver = load_solver_config()
    except ValueError as e:
        print(f"rescont: invalid environment configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG
    _configure_logging(solver, args.verbose)

    try:
        config = load_run_config(args.config, solver.range_tol)
    except ConfigError as e:
        print(f"rescont: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        return COMMANDS[args.command](config, solver, args.output)
    except NumericalError as e:
        print(f"rescont: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
