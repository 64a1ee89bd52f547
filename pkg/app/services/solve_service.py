"""
Single-solve service behind the HTTP endpoint
"""
import logging
from typing import Optional

from pydantic import ValidationError

from app.core.errors import ConfigurationError
from app.schemas.experiment import ExperimentConfig
from app.schemas.solve import SolveRequest, SolveResponse
from app.services.bench_service import BenchmarkService
from app.services.cache_service import CacheService

logger = logging.getLogger(__name__)

# shared across requests so repeated sizes reuse their assembly
_cache = CacheService()


class SolveService:
    """Maps a request onto a one-cell experiment"""

    def __init__(self, cache: Optional[CacheService] = None):
        self.cache = cache or _cache

    def solve(self, request: SolveRequest) -> SolveResponse:
        try:
            config = ExperimentConfig(
                n_s=[request.n_s],
                n_mu=[request.n_mu],
                n_nu=[request.n_nu],
                formal_solver=request.formal_solver,
                methods=[request.method],
                preconditioners=[request.preconditioner],
                omega=request.omega,
                tolerance=request.tolerance,
                max_iterations=request.max_iterations,
                restart=request.restart,
                ilut_threshold=request.ilut_threshold,
                sor_variant=request.sor_variant,
                assembly=request.assembly,
                epsilon=request.epsilon,
            )
        except ValidationError as exc:
            raise ConfigurationError(str(exc)) from exc
        service = BenchmarkService(config, cache=self.cache)
        service.check_modes()
        cell = service.cells()[0]
        logger.info("🔍 Solve request %s/%s at %s", request.method.value, request.preconditioner.value, cell[2])
        report = service.run_cell(cell)
        return SolveResponse(
            n_s=request.n_s,
            n_mu=request.n_mu,
            n_nu=request.n_nu,
            method=request.method,
            preconditioner=request.preconditioner,
            status=report.status,
            converged=report.converged,
            iterations=report.iterations,
            final_residual=report.final_residual if report.residual_history else None,
            matvec_count=report.matvec_count,
            residual_check_count=report.residual_check_count,
            wall_time=report.wall_time,
            timings=report.timings,
            metadata=report.metadata,
            solution=report.solution if request.include_solution else None,
            residual_history=report.residual_history if request.include_solution else None,
            message=report.message,
        )
