"""
Shared plumbing for iterative solvers: operator/preconditioner counting and report building
"""
import logging
import time
from typing import Callable, List, Optional, Union

import numpy as np
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from app.core.errors import ContractViolation
from app.schemas.solver import SolveReport, SolveStatus, SolverConfig
from app.solvers.preconditioners import IdentityPreconditioner, Preconditioner

logger = logging.getLogger(__name__)

OperatorLike = Union[np.ndarray, LinearOperator, Callable[[np.ndarray], np.ndarray]]

# inner products below this fraction of their natural scale count as breakdown
BREAKDOWN_TOL = 1e-30


class CountingOperator:
    """Wraps A so the report can tell method applications from residual checks"""

    def __init__(self, op: OperatorLike, n: int):
        if callable(op) and not isinstance(op, LinearOperator):
            func = op
            op = LinearOperator((n, n), matvec=lambda x: func(np.ravel(x)), dtype=float)
        self._op = aslinearoperator(op)
        if self._op.shape != (n, n):
            raise ContractViolation(f"operator shape {self._op.shape} does not match rhs length {n}")
        self.matvecs = 0
        self.residual_checks = 0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        self.matvecs += 1
        return np.ravel(self._op.matvec(x))

    def residual(self, b: np.ndarray, x: np.ndarray) -> np.ndarray:
        self.residual_checks += 1
        return b - np.ravel(self._op.matvec(x))


class CountingPreconditioner:
    def __init__(self, preconditioner: Optional[Preconditioner], n: int):
        self._pc = preconditioner or IdentityPreconditioner(n)
        if self._pc.order != n:
            raise ContractViolation(f"preconditioner order {self._pc.order} does not match rhs length {n}")
        self.applications = 0

    @property
    def kind(self):
        return self._pc.kind

    def __call__(self, v: np.ndarray) -> np.ndarray:
        self.applications += 1
        return self._pc.apply(v)


class IterationLog:
    """Relative true residuals and the best iterate seen so far"""

    def __init__(self, b_norm: float, cfg: SolverConfig, name: str):
        self.b_norm = b_norm
        self.cfg = cfg
        self.name = name
        self.history: List[float] = []
        self.best_x: Optional[np.ndarray] = None
        self.best_residual = np.inf
        self.started = time.perf_counter()

    def record(self, x: np.ndarray, residual: np.ndarray) -> float:
        relative = float(np.linalg.norm(residual) / self.b_norm)
        self.history.append(relative)
        if relative < self.best_residual:
            self.best_residual, self.best_x = relative, x.copy()
        logger.debug("%s it=%d relres=%.3e", self.name, len(self.history) - 1, relative)
        return relative

    def converged(self) -> bool:
        return self.history[-1] < self.cfg.tolerance

    @property
    def iterations(self) -> int:
        return len(self.history) - 1

    def report(
        self,
        x: np.ndarray,
        status: SolveStatus,
        op: CountingOperator,
        pc: CountingPreconditioner,
        message: Optional[str] = None,
    ) -> SolveReport:
        solution = x
        if status in (SolveStatus.BREAKDOWN, SolveStatus.MAX_ITERATIONS) and self.best_x is not None:
            solution = self.best_x
        report = SolveReport(
            solution=np.asarray(solution, dtype=float).tolist(),
            iterations=self.iterations,
            residual_history=self.history,
            matvec_count=op.matvecs,
            residual_check_count=op.residual_checks,
            preconditioner_apply_count=pc.applications,
            converged=status == SolveStatus.CONVERGED,
            status=status,
            message=message,
            wall_time=time.perf_counter() - self.started,
        )
        icon = "✅" if report.converged else "⚠️"
        logger.info(
            "%s %s/%s: %s after %d iterations (relres %.2e)",
            icon, self.name, pc.kind.value, status.value, report.iterations, report.final_residual,
        )
        return report


def prepare(op: OperatorLike, b: np.ndarray, preconditioner: Optional[Preconditioner], x0: Optional[np.ndarray]):
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if x.shape != b.shape:
        raise ContractViolation(f"initial guess shape {x.shape} does not match rhs {b.shape}")
    return CountingOperator(op, n), CountingPreconditioner(preconditioner, n), b, x
