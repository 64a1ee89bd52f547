"""
Preconditioned Krylov methods: GMRES, BICGSTAB and CGS.

GMRES builds its Arnoldi basis on P^{-1} A. BICGSTAB and CGS keep the recurrence
residual unpreconditioned and apply P^{-1} to their search directions. Termination
always looks at the true, unpreconditioned relative residual ||b - A x|| / ||b||.
"""
import logging
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular

from app.schemas.solver import Method, SolveReport, SolveStatus, SolverConfig
from app.solvers.base import BREAKDOWN_TOL, IterationLog, OperatorLike, prepare
from app.solvers.preconditioners import Preconditioner

logger = logging.getLogger(__name__)


def gmres(
    apply_op: OperatorLike,
    b: np.ndarray,
    preconditioner: Optional[Preconditioner] = None,
    x0: Optional[np.ndarray] = None,
    cfg: Optional[SolverConfig] = None,
) -> SolveReport:
    """Arnoldi with modified Gram-Schmidt, least squares by progressive Givens rotations"""
    cfg = cfg or SolverConfig(method=Method.GMRES)
    op, pc, b, x = prepare(apply_op, b, preconditioner, x0)
    n = b.size
    log = IterationLog(np.linalg.norm(b) or 1.0, cfg, "gmres")
    residual = op.residual(b, x)
    log.record(x, residual)
    if log.converged():
        return log.report(x, SolveStatus.CONVERGED, op, pc)

    cycle = min(cfg.restart or n, n)
    status: Optional[SolveStatus] = None
    while status is None:
        z = pc(residual)
        beta = np.linalg.norm(z)
        if beta == 0.0:
            status = SolveStatus.BREAKDOWN
            break
        basis = np.zeros((cycle + 1, n))
        hessenberg = np.zeros((cycle + 1, cycle))
        cs, sn = np.zeros(cycle), np.zeros(cycle)
        g = np.zeros(cycle + 1)
        g[0] = beta
        basis[0] = z / beta
        x_start = x

        for j in range(cycle):
            w = pc(op(basis[j]))
            for i in range(j + 1):
                hessenberg[i, j] = w @ basis[i]
                w -= hessenberg[i, j] * basis[i]
            h_next = np.linalg.norm(w)
            hessenberg[j + 1, j] = h_next

            for i in range(j):
                upper = cs[i] * hessenberg[i, j] + sn[i] * hessenberg[i + 1, j]
                hessenberg[i + 1, j] = -sn[i] * hessenberg[i, j] + cs[i] * hessenberg[i + 1, j]
                hessenberg[i, j] = upper
            denom = np.hypot(hessenberg[j, j], h_next)
            if denom == 0.0:
                status = SolveStatus.BREAKDOWN
                break
            cs[j], sn[j] = hessenberg[j, j] / denom, h_next / denom
            hessenberg[j, j], hessenberg[j + 1, j] = denom, 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]

            y = solve_triangular(hessenberg[:j + 1, :j + 1], g[:j + 1])
            x = x_start + basis[:j + 1].T @ y
            residual = op.residual(b, x)
            log.record(x, residual)

            if log.converged():
                status = SolveStatus.CONVERGED
            elif h_next <= BREAKDOWN_TOL * beta:
                # Krylov space is invariant: x is exact there, up to rounding
                status = SolveStatus.LUCKY_BREAKDOWN
            elif log.iterations >= cfg.max_iterations:
                status = SolveStatus.MAX_ITERATIONS
            if status is not None:
                break
            basis[j + 1] = w / h_next
        # cycle exhausted without a verdict: restart from the current iterate

    return log.report(x, status, op, pc)


def bicgstab(
    apply_op: OperatorLike,
    b: np.ndarray,
    preconditioner: Optional[Preconditioner] = None,
    x0: Optional[np.ndarray] = None,
    cfg: Optional[SolverConfig] = None,
) -> SolveReport:
    """
    Preconditioned BICGSTAB on the unpreconditioned residual: P^{-1} enters through
    the search directions p and s. Two operator and two preconditioner applications
    per counted iteration.
    """
    cfg = cfg or SolverConfig(method=Method.BICGSTAB)
    op, pc, b, x = prepare(apply_op, b, preconditioner, x0)
    log = IterationLog(np.linalg.norm(b) or 1.0, cfg, "bicgstab")
    r = op.residual(b, x)
    log.record(x, r)
    if log.converged():
        return log.report(x, SolveStatus.CONVERGED, op, pc)

    r_hat = r.copy()
    rho_old = alpha = omega = 1.0
    p = np.zeros_like(r)
    v = np.zeros_like(r)
    status: Optional[SolveStatus] = None
    message = None
    while status is None:
        rho = r_hat @ r
        if abs(rho) <= BREAKDOWN_TOL * np.linalg.norm(r_hat) * np.linalg.norm(r):
            status, message = SolveStatus.BREAKDOWN, "rho breakdown"
            break
        beta = (rho / rho_old) * (alpha / omega)
        p = r + beta * (p - omega * v)
        p_hat = pc(p)
        v = op(p_hat)
        denom = r_hat @ v
        if abs(denom) <= BREAKDOWN_TOL * np.linalg.norm(r_hat) * np.linalg.norm(v):
            status, message = SolveStatus.BREAKDOWN, "r_hat.v breakdown"
            break
        alpha = rho / denom
        s = r - alpha * v
        s_hat = pc(s)
        t = op(s_hat)
        tt = t @ t
        omega = (t @ s) / tt if tt > 0.0 else 0.0
        x = x + alpha * p_hat + omega * s_hat
        r = s - omega * t
        log.record(x, op.residual(b, x))

        if log.converged():
            status = SolveStatus.CONVERGED
        elif abs(omega) <= BREAKDOWN_TOL:
            status, message = SolveStatus.BREAKDOWN, "omega breakdown"
        elif log.iterations >= cfg.max_iterations:
            status = SolveStatus.MAX_ITERATIONS
        rho_old = rho

    return log.report(x, status, op, pc, message)


def cgs(
    apply_op: OperatorLike,
    b: np.ndarray,
    preconditioner: Optional[Preconditioner] = None,
    x0: Optional[np.ndarray] = None,
    cfg: Optional[SolverConfig] = None,
) -> SolveReport:
    """Conjugate gradient squared, same preconditioning form as `bicgstab`"""
    cfg = cfg or SolverConfig(method=Method.CGS)
    op, pc, b, x = prepare(apply_op, b, preconditioner, x0)
    log = IterationLog(np.linalg.norm(b) or 1.0, cfg, "cgs")
    r = op.residual(b, x)
    log.record(x, r)
    if log.converged():
        return log.report(x, SolveStatus.CONVERGED, op, pc)

    r_hat = r.copy()
    rho_old = 1.0
    p = q = np.zeros_like(r)
    status: Optional[SolveStatus] = None
    message = None
    while status is None:
        rho = r_hat @ r
        if abs(rho) <= BREAKDOWN_TOL * np.linalg.norm(r_hat) * np.linalg.norm(r):
            status, message = SolveStatus.BREAKDOWN, "rho breakdown"
            break
        if log.iterations == 0:
            u = r.copy()
            p = u.copy()
        else:
            beta = rho / rho_old
            u = r + beta * q
            p = u + beta * (q + beta * p)
        v = op(pc(p))
        sigma = r_hat @ v
        if abs(sigma) <= BREAKDOWN_TOL * np.linalg.norm(r_hat) * np.linalg.norm(v):
            status, message = SolveStatus.BREAKDOWN, "r_hat.v breakdown"
            break
        alpha = rho / sigma
        q = u - alpha * v
        u_hat = pc(u + q)
        x = x + alpha * u_hat
        r = r - alpha * op(u_hat)
        log.record(x, op.residual(b, x))

        if log.converged():
            status = SolveStatus.CONVERGED
        elif log.iterations >= cfg.max_iterations:
            status = SolveStatus.MAX_ITERATIONS
        rho_old = rho

    return log.report(x, status, op, pc, message)
