"""
Benchmark service: experiment sweeps, convergence tables, matrix exports and solution profiles
"""
import csv
import json
import logging
import time
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from pydantic import ValidationError

from app.core.errors import ConfigurationError, DivergenceError, UnsupportedModeError
from app.linalg.matrix_market import write_matrix_market
from app.physics.discretization import build_grid
from app.physics.operator import OperatorContext, assemble_A, stokes_solution
from app.schemas.experiment import AssemblyMode, ExperimentConfig, ExportTarget
from app.schemas.model import FormalSolverKind, ModelParams
from app.schemas.solver import Method, PreconditionerKind, SolveReport, SolveStatus
from app.services.cache_service import CacheService
from app.solvers.dispatch import build_preconditioner, solve
from app.solvers.preconditioners import Preconditioner, build_ilut

logger = logging.getLogger(__name__)

Size = Tuple[int, int, int]
Cell = Tuple[Method, PreconditionerKind, Size]

# preconditioners that read entries of A, not just its diagonal
NEEDS_ENTRIES = (PreconditionerKind.SOR, PreconditionerKind.SSOR, PreconditionerKind.ILUT)


@dataclass(frozen=True)
class ProblemKey:
    """Everything that determines A and b"""
    n_s: int
    n_mu: int
    n_nu: int
    formal_solver: FormalSolverKind
    params: ModelParams
    tau_bounds: Tuple[float, float]
    nu_bounds: Tuple[float, float]


def load_config(path: str | Path) -> ExperimentConfig:
    """Read one TOML experiment file"""
    path = Path(path)
    try:
        with path.open("rb") as handle:
            data = tomllib.load(handle)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from exc
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigurationError(f"invalid config {path}:\n{exc}") from exc


def size_label(size: Size) -> str:
    n_s, n_mu, n_nu = size
    return f"ns{n_s}_nmu{n_mu}_nnu{n_nu}"


def column_labels(sizes: List[Size]) -> List[str]:
    """Table headers naming only the dimensions that vary across the sweep"""
    vary_depth = len({size[0] for size in sizes}) > 1
    vary_angle = len({size[1:] for size in sizes}) > 1
    labels = []
    for n_s, n_mu, n_nu in sizes:
        parts = []
        if vary_depth or not vary_angle:
            parts.append(f"N_s={n_s}")
        if vary_angle:
            parts.append(f"N_mu=N_nu={n_mu}" if n_mu == n_nu else f"N_mu={n_mu} N_nu={n_nu}")
        labels.append(" ".join(parts))
    return labels


def table_cell(report: SolveReport) -> str:
    return str(report.iterations) if report.converged else "-"


class BenchmarkService:
    """Runs the sweeps of one experiment and writes their artifacts"""

    def __init__(self, config: ExperimentConfig, cache: Optional[CacheService] = None):
        self.config = config
        self.cache = cache or CacheService()
        self.output_dir = Path(config.output_dir)

    @property
    def matrix_free(self) -> bool:
        return self.config.assembly == AssemblyMode.MATRIX_FREE

    def problem_key(self, size: Size) -> ProblemKey:
        cfg = self.config
        return ProblemKey(
            *size,
            formal_solver=cfg.formal_solver,
            params=cfg.model_params(),
            tau_bounds=(cfg.tau_min, cfg.tau_max),
            nu_bounds=(cfg.nu_min, cfg.nu_max),
        )

    def context(self, size: Size) -> OperatorContext:
        key = self.problem_key(size)

        def build() -> OperatorContext:
            cfg = self.config
            grid = build_grid(
                *size,
                params=key.params,
                tau_min=cfg.tau_min,
                tau_max=cfg.tau_max,
                nu_min=cfg.nu_min,
                nu_max=cfg.nu_max,
            )
            return OperatorContext(grid, key.params, key.formal_solver)

        return self.cache.get_or_build(("context", key), build)

    def matrix(self, size: Size, point_source: Optional[bool] = None) -> np.ndarray:
        if point_source is None:
            point_source = self.config.point_source_assembly
        ctx = self.context(size)
        return self.cache.get_or_build(
            ("matrix", self.problem_key(size), point_source),
            lambda: assemble_A(ctx, point_source=point_source),
        )

    def preconditioner(self, size: Size, method: Method, kind: PreconditionerKind) -> Preconditioner:
        spec = self.config.preconditioner_spec(kind)
        omega = self.config.solver_config(method).resolved_omega(kind)
        if self.matrix_free:
            # entries of A are assembled for building P only; iterations stay matrix-free
            matrix = self.matrix(size, point_source=True) if kind in NEEDS_ENTRIES else None
        else:
            matrix = self.matrix(size)
        return self.cache.get_or_build(
            ("preconditioner", self.problem_key(size), spec, omega, matrix is not None),
            lambda: build_preconditioner(spec, omega, self.context(size), matrix),
        )

    def run_cell(self, cell: Cell) -> SolveReport:
        method, kind, size = cell
        cfg = self.config.solver_config(method)
        ctx = self.context(size)
        timings: Dict[str, float] = {}

        matrix = None
        if not self.matrix_free:
            clock = time.perf_counter()
            matrix = self.matrix(size)
            timings["assembly"] = time.perf_counter() - clock
        preconditioner = None
        if method != Method.LU:
            clock = time.perf_counter()
            preconditioner = self.preconditioner(size, method, kind)
            timings["preconditioner"] = time.perf_counter() - clock

        try:
            report = solve(ctx, cfg, self.config.preconditioner_spec(kind), matrix, preconditioner)
        except DivergenceError as exc:
            logger.warning("❌ %s/%s %s diverged: %s", method.value, kind.value, size_label(size), exc)
            report = SolveReport(iterations=exc.iteration, status=SolveStatus.DIVERGED, message=str(exc))

        logger.info(
            "📊 %s/%s %s -> %s",
            method.value, kind.value, size_label(size), table_cell(report),
        )
        return report.model_copy(update={"timings": {**timings, **report.timings}})

    def cells(self) -> List[Cell]:
        cfg = self.config
        return [
            (method, kind, size)
            for size in cfg.sizes()
            for kind in cfg.preconditioners
            for method in cfg.methods
        ]

    def check_modes(self) -> None:
        if self.matrix_free and Method.LU in self.config.methods:
            raise UnsupportedModeError("the LU method needs assembly = \"assembled\"")

    def run_experiment(self) -> Dict[Cell, SolveReport]:
        """
        Solve every (method, preconditioner, size) cell, then write one JSON report and one
        residual CSV per cell, a `table_<preconditioner>.csv` per preconditioner and `grid.json`.

        Cells may run on a thread pool; results are keyed by cell and written in sweep order.
        """
        self.check_modes()
        cells = self.cells()
        logger.info("🚀 Running %d cells with %d worker(s)", len(cells), self.config.workers)
        with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
            reports = list(pool.map(self.run_cell, cells))
        results = dict(zip(cells, reports))

        self.output_dir.mkdir(parents=True, exist_ok=True)
        for (method, kind, size), report in results.items():
            stem = f"{method.value}_{kind.value}_{size_label(size)}"
            self._write_report(self.output_dir / "reports" / f"{stem}.json", report)
            self._write_residuals(self.output_dir / "residuals" / f"{stem}.csv", report)
        self.write_tables(results)
        self.write_grid_snapshot()
        stats = self.cache.get_stats()
        logger.info("🗄️ Cache: %d entries, %d hits, %d misses", stats["size"], stats["hits"], stats["misses"])
        logger.info("✅ Experiment written to %s", self.output_dir)
        return results

    def write_tables(self, results: Dict[Cell, SolveReport]) -> List[Path]:
        """Rows are methods, columns sizes, cells iterations or "-" when not converged"""
        sizes = self.config.sizes()
        header = ["method", *column_labels(sizes)]
        paths = []
        for kind in self.config.preconditioners:
            path = self.output_dir / f"table_{kind.value}.csv"
            with path.open("w", newline="") as handle:
                writer = csv.writer(handle)
                writer.writerow(header)
                for method in self.config.methods:
                    writer.writerow([method.value, *(table_cell(results[(method, kind, size)]) for size in sizes)])
            paths.append(path)
        return paths

    def write_grid_snapshot(self) -> Path:
        path = self.output_dir / "grid.json"
        snapshot = {size_label(size): self.context(size).grid.to_snapshot() for size in self.config.sizes()}
        path.write_text(json.dumps(snapshot, indent=2))
        return path

    @staticmethod
    def _write_report(path: Path, report: SolveReport) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(report.model_dump_json(indent=2))

    @staticmethod
    def _write_residuals(path: Path, report: SolveReport) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["iteration", "relres"])
            for iteration, value in enumerate(report.residual_history):
                writer.writerow([iteration, repr(value)])

    def export_matrix(self, target: ExportTarget) -> List[Path]:
        """
        Matrix Market files per size: `A` (array format), `PinvA` for every configured
        preconditioner, or the ILUT factors `L` and `U` (coordinate format).
        """
        if self.matrix_free:
            raise UnsupportedModeError("matrix export needs assembly = \"assembled\"")
        export_dir = self.output_dir / "matrices"
        paths = []
        for size in self.config.sizes():
            label = size_label(size)
            matrix = self.matrix(size)
            if target == ExportTarget.A:
                paths.append(write_matrix_market(export_dir / f"A_{label}.mtx", matrix, comment="A = Id - J Lambda T"))
            elif target == ExportTarget.PINV_A:
                for kind in self.config.preconditioners:
                    pc = self.preconditioner(size, self.config.methods[0], kind)
                    product = np.column_stack([pc.apply(column) for column in matrix.T])
                    paths.append(write_matrix_market(
                        export_dir / f"PinvA_{kind.value}_{label}.mtx", product, comment=f"P^-1 A, P = {kind.value}",
                    ))
            else:
                ilut = build_ilut(matrix, self.config.ilut_threshold)
                comment = f"ILUT threshold {self.config.ilut_threshold}"
                paths.append(write_matrix_market(
                    export_dir / f"ilut_L_{label}.mtx", sp.csr_matrix(ilut.lower.to_dense()), comment=comment,
                ))
                paths.append(write_matrix_market(export_dir / f"ilut_U_{label}.mtx", ilut.upper.matrix, comment=comment))
        return paths

    def solution_profile(self) -> List[Path]:
        """
        Solve with the first configured method and preconditioner, then write the depth
        profile (tau, sigma00, sigma20) and the emergent Stokes parameters at the top node.
        """
        self.check_modes()
        method, kind = self.config.methods[0], self.config.preconditioners[0]
        self.output_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        for size in self.config.sizes():
            label = size_label(size)
            report = self.run_cell((method, kind, size))
            if not report.converged:
                logger.warning("⚠️  Profile %s comes from a non-converged solve (%s)", label, report.status.value)
            if not report.solution:
                continue
            ctx = self.context(size)
            sigma = np.asarray(report.solution)

            profile = self.output_dir / f"profile_{label}.csv"
            with profile.open("w", newline="") as handle:
                writer = csv.writer(handle)
                writer.writerow(["tau", "sigma00", "sigma20"])
                for row in zip(ctx.grid.tau, sigma[0::2], sigma[1::2]):
                    writer.writerow([repr(float(value)) for value in row])

            field = stokes_solution(ctx, sigma)
            grid = ctx.grid
            surface = self.output_dir / f"surface_{label}.csv"
            with surface.open("w", newline="") as handle:
                writer = csv.writer(handle)
                writer.writerow(["mu", "nu", "I", "Q"])
                for m in np.flatnonzero(grid.mu_nodes > 0):
                    for p, nu in enumerate(grid.nu_nodes):
                        writer.writerow([repr(float(v)) for v in (grid.mu_nodes[m], nu, field.I[0, m, p], field.Q[0, m, p])])
            paths.extend([profile, surface])
        return paths
