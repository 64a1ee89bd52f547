"""
Solve dispatch: right-hand side, initial guess, preconditioner and method selection
"""
import logging
import time
from typing import Callable, Dict, Optional

import numpy as np

from app.core.errors import UnsupportedModeError
from app.linalg.dense import lu_factor, lu_solve
from app.physics.operator import OperatorContext, assemble_A, build_rhs, probe_diagonal
from app.physics.transfer import interleave
from app.schemas.solver import (
    Method,
    PreconditionerKind,
    PreconditionerSpec,
    SolveReport,
    SolveStatus,
    SolverConfig,
)
from app.solvers.krylov import bicgstab, cgs, gmres
from app.solvers.preconditioners import (
    IdentityPreconditioner,
    Preconditioner,
    build_ilut,
    build_jacobi,
    build_sor,
    build_ssor,
)
from app.solvers.stationary import richardson

logger = logging.getLogger(__name__)

ITERATIVE_METHODS: Dict[Method, Callable[..., SolveReport]] = {
    Method.RICHARDSON: richardson,
    Method.GMRES: gmres,
    Method.BICGSTAB: bicgstab,
    Method.CGS: cgs,
}


def initial_guess(n_s: int) -> np.ndarray:
    """s00 = 1, s20 = 0 at every depth"""
    return interleave(np.ones(n_s), np.zeros(n_s))


def build_preconditioner(
    spec: PreconditionerSpec,
    omega: float,
    ctx: OperatorContext,
    matrix: Optional[np.ndarray] = None,
) -> Preconditioner:
    """
    Jacobi works from diagonal probes when no matrix is given; SOR, SSOR and ILUT need
    the entries of A and assemble it on demand.
    """
    kind = spec.kind
    if kind == PreconditionerKind.NONE:
        return IdentityPreconditioner(ctx.dimension)
    if kind == PreconditionerKind.JACOBI:
        return build_jacobi(matrix if matrix is not None else probe_diagonal(ctx))
    if matrix is None:
        logger.info("⚙️  Assembling A to build the %s preconditioner", kind.value)
        matrix = assemble_A(ctx, point_source=True)
    if kind == PreconditionerKind.SOR:
        return build_sor(matrix, omega, spec.sor_variant)
    if kind == PreconditionerKind.SSOR:
        return build_ssor(matrix, omega)
    return build_ilut(matrix, spec.threshold)


def direct_solve(matrix: np.ndarray, b: np.ndarray, cfg: SolverConfig) -> SolveReport:
    """LU path; iterations 0, history holds the final relative residual only"""
    started = time.perf_counter()
    x = lu_solve(lu_factor(matrix), b)
    relative = float(np.linalg.norm(b - matrix @ x) / (np.linalg.norm(b) or 1.0))
    converged = relative <= cfg.tolerance
    return SolveReport(
        solution=x.tolist(),
        iterations=0,
        residual_history=[relative],
        residual_check_count=1,
        converged=converged,
        status=SolveStatus.CONVERGED if converged else SolveStatus.MAX_ITERATIONS,
        wall_time=time.perf_counter() - started,
    )


def solve(
    ctx: OperatorContext,
    cfg: SolverConfig,
    spec: Optional[PreconditionerSpec] = None,
    matrix: Optional[np.ndarray] = None,
    preconditioner: Optional[Preconditioner] = None,
) -> SolveReport:
    """
    Solve A sigma = b from the initial guess [1, 0, 1, 0, ...].

    With `matrix` the method runs on the assembled A, otherwise on the matrix-free
    operator. A prebuilt `preconditioner` takes precedence over `spec`.
    """
    spec = spec or PreconditionerSpec()
    omega = cfg.resolved_omega(spec.kind)
    timings: Dict[str, float] = {}

    started = time.perf_counter()
    b = build_rhs(ctx)
    x0 = initial_guess(ctx.grid.n_s)

    if cfg.method == Method.LU:
        if matrix is None:
            raise UnsupportedModeError("the LU method needs the assembled matrix")
        report = direct_solve(matrix, b, cfg)
    else:
        if preconditioner is None:
            clock = time.perf_counter()
            preconditioner = build_preconditioner(spec, omega, ctx, matrix)
            timings["preconditioner"] = time.perf_counter() - clock
        operator = matrix if matrix is not None else ctx.linear_operator()
        report = ITERATIVE_METHODS[cfg.method](operator, b, preconditioner, x0, cfg)
    timings["solve"] = report.wall_time

    grid = ctx.grid
    metadata = {
        "n_s": grid.n_s,
        "n_mu": grid.n_mu,
        "n_nu": grid.n_nu,
        "formal_solver": ctx.kind.value,
        "method": cfg.method.value,
        "preconditioner": spec.kind.value,
        "omega": omega,
        "tolerance": cfg.tolerance,
        "assembled": matrix is not None,
        "epsilon": ctx.params.epsilon,
        "planck_W": ctx.params.planck_W,
        "profile_mass": grid.profile_mass,
        "profile_mass_defect": 1.0 - grid.profile_mass,
    }
    return report.model_copy(update={
        "timings": timings,
        "metadata": metadata,
        "wall_time": time.perf_counter() - started,
    })
