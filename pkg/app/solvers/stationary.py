"""
Preconditioned Richardson iteration x^{n+1} = x^n + P^{-1}(b - A x^n)
"""
import logging
from typing import Optional

import numpy as np

from app.core.errors import DivergenceError
from app.schemas.solver import SolveReport, SolveStatus, SolverConfig
from app.solvers.base import IterationLog, OperatorLike, prepare
from app.solvers.preconditioners import Preconditioner

logger = logging.getLogger(__name__)


def richardson(
    apply_op: OperatorLike,
    b: np.ndarray,
    preconditioner: Optional[Preconditioner] = None,
    x0: Optional[np.ndarray] = None,
    cfg: Optional[SolverConfig] = None,
) -> SolveReport:
    """Stationary iteration; Jacobi, SOR and SSOR are Richardson with the matching P"""
    cfg = cfg or SolverConfig()
    op, pc, b, x = prepare(apply_op, b, preconditioner, x0)
    log = IterationLog(np.linalg.norm(b) or 1.0, cfg, "richardson")

    # the initial residual is a termination check; every later residual drives the update
    r = op.residual(b, x)
    log.record(x, r)
    while not log.converged() and log.iterations < cfg.max_iterations:
        x = x + pc(r)
        r = b - op(x)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(r))):
            raise DivergenceError(log.iterations + 1)
        log.record(x, r)

    status = SolveStatus.CONVERGED if log.converged() else SolveStatus.MAX_ITERATIONS
    return log.report(x, status, op, pc)
