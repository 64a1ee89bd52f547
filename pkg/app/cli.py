"""
Command line harness: solve, table, export and profile subcommands over one experiment file
"""
import argparse
import logging
from typing import Optional, Sequence

from app.core.errors import ConfigurationError, RadiativeSolverError
from app.core.logging import setup_logging
from app.schemas.experiment import AssemblyMode, ExperimentConfig, ExportTarget
from app.services.bench_service import BenchmarkService, load_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Polarized radiative transfer benchmark: iterative solvers and preconditioners.",
    )
    parser.add_argument("--log-level", default=None, help="Override LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    commands = {
        "solve": "Solve every cell and write reports and residual histories",
        "table": "Solve every cell and write the iteration tables",
        "export": "Write Matrix Market files of A, P^-1 A or the ILUT factors",
        "profile": "Write the sigma depth profile and the emergent Stokes parameters",
    }
    for name, help_text in commands.items():
        command = sub.add_parser(name, help=help_text)
        command.add_argument("config", help="TOML experiment file")
        command.add_argument("--output-dir", default=None, help="Override output_dir")
        mode = command.add_mutually_exclusive_group()
        mode.add_argument("--matrix-free", dest="assembly", action="store_const", const=AssemblyMode.MATRIX_FREE)
        mode.add_argument("--assembled", dest="assembly", action="store_const", const=AssemblyMode.ASSEMBLED)
        if name == "export":
            command.add_argument(
                "--target",
                type=ExportTarget,
                choices=list(ExportTarget),
                default=ExportTarget.A,
                help="A, PinvA or ilut",
            )
    return parser


def apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    update = {}
    if args.output_dir:
        update["output_dir"] = args.output_dir
    if args.assembly:
        update["assembly"] = args.assembly
    return config.model_copy(update=update) if update else config


def run(args: argparse.Namespace) -> int:
    config = apply_overrides(load_config(args.config), args)
    service = BenchmarkService(config)
    if args.command == "export":
        for path in service.export_matrix(args.target):
            print(f"Wrote: {path}")
    elif args.command == "profile":
        for path in service.solution_profile():
            print(f"Wrote: {path}")
    else:
        results = service.run_experiment()
        converged = sum(report.converged for report in results.values())
        print(f"{converged}/{len(results)} cells converged, outputs in {service.output_dir}")
        if args.command == "table":
            for kind in config.preconditioners:
                print(f"Wrote: {service.output_dir / f'table_{kind.value}.csv'}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        return run(args)
    except ConfigurationError as exc:
        logger.error("❌ Configuration error: %s", exc)
        return EXIT_CONFIG
    except RadiativeSolverError as exc:
        logger.error("❌ Solver failure: %s", exc)
        return EXIT_SOLVER
