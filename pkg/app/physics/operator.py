"""
System matrix A = Id - J Lambda T as a matrix-free operator, its column-by-column assembly
and the right-hand side b = J t + c
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse.linalg import LinearOperator

from app.core.errors import ContractViolation
from app.physics.discretization import Grid
from app.physics.transfer import (
    RaySweep,
    StokesField,
    apply_J,
    apply_T,
    boundary_field,
    check_sigma,
    interleave,
    pol_tensor,
    ray_sweep,
)
from app.schemas.model import FormalSolverKind, ModelParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class OperatorContext:
    """Everything needed to apply A without storing it"""
    grid: Grid
    params: ModelParams = field(default_factory=ModelParams)
    kind: FormalSolverKind = FormalSolverKind.DELO_LINEAR

    @property
    def dimension(self) -> int:
        return self.grid.dimension

    @cached_property
    def sweep(self) -> RaySweep:
        return ray_sweep(self.grid, self.kind)

    def linear_operator(self) -> LinearOperator:
        n = self.dimension
        return LinearOperator((n, n), matvec=lambda x: apply_A(self, np.ravel(x)), dtype=float)


def apply_A(ctx: OperatorContext, sigma_in: np.ndarray) -> np.ndarray:
    """sigma_in - J Lambda T sigma_in, one formal-solver sweep per call"""
    sigma_in = check_sigma(sigma_in, ctx.grid.n_s)
    field_ = ctx.sweep.solve(apply_T(sigma_in, ctx.grid))
    return sigma_in - apply_J(field_, ctx.grid, ctx.params)


def build_rhs(ctx: OperatorContext) -> np.ndarray:
    """b = J t + c with c = [eps, 0, eps, 0, ...]"""
    c = interleave(np.full(ctx.grid.n_s, ctx.params.epsilon), np.zeros(ctx.grid.n_s))
    return apply_J(boundary_field(ctx.grid, ctx.kind, ctx.params), ctx.grid, ctx.params) + c


def _point_source_sweep(coeffs, source: np.ndarray, k: int, upward: bool) -> np.ndarray:
    """
    Formal solution for a source nonzero only at depth node k with zero incoming radiation.

    Upwind of node k the solution vanishes; past the first step beyond k it is a pure
    attenuation, evaluated as a cumulative product instead of a full sweep.
    """
    n = coeffs.attenuation.shape[0] + 1
    a, bp, bn = coeffs.attenuation, coeffs.weight_prev, coeffs.weight_next
    shape = np.broadcast_shapes(source.shape, a.shape[1:])
    out = np.zeros((n, *shape))
    if upward:
        if k < n - 1:
            out[k] = bn[k] * source
        if k >= 1:
            out[k - 1] = a[k - 1] * out[k] + bp[k - 1] * source
            if k >= 2:
                decay = np.cumprod(a[k - 2::-1], axis=0)  # steps k-2, k-3, ..., 0
                out[k - 2::-1] = decay[:, None] * out[k - 1]
    else:
        if k > 0:
            out[k] = bn[k - 1] * source
        if k < n - 1:
            out[k + 1] = a[k] * out[k] + bp[k] * source
            if k < n - 2:
                decay = np.cumprod(a[k + 1:], axis=0)
                out[k + 2:] = decay[:, None] * out[k + 1]
    return out


def apply_A_point_source(ctx: OperatorContext, j: int) -> np.ndarray:
    """A e_j via the point-source fast path; equals apply_A(ctx, e_j)"""
    if not 0 <= j < ctx.dimension:
        raise ContractViolation(f"column index {j} outside [0, {ctx.dimension})")
    grid, sweep = ctx.grid, ctx.sweep
    k, component = divmod(j, 2)
    t1, t2 = pol_tensor(grid.mu_nodes)
    if component == 0:
        s_i, s_q = np.ones(grid.n_mu), np.zeros(grid.n_mu)
    else:
        s_i, s_q = t1, t2
    source = np.stack([s_i, s_q])[..., None]  # (2, N_mu, 1)
    nd = sweep.n_down
    down = _point_source_sweep(sweep.down, source[:, :nd], k, upward=False)
    up = _point_source_sweep(sweep.up, source[:, nd:], k, upward=True)
    full = np.concatenate([down, up], axis=2)
    out = -apply_J(StokesField(full[:, 0], full[:, 1]), grid, ctx.params)
    out[j] += 1.0
    return out


def assemble_A(ctx: OperatorContext, point_source: bool = False) -> np.ndarray:
    """Dense A, column j = A e_j"""
    n = ctx.dimension
    matrix = np.empty((n, n))
    unit = np.zeros(n)
    for j in range(n):
        if point_source:
            matrix[:, j] = apply_A_point_source(ctx, j)
        else:
            unit[j] = 1.0
            matrix[:, j] = apply_A(ctx, unit)
            unit[j] = 0.0
    logger.debug("Assembled %dx%d matrix (point_source=%s)", n, n, point_source)
    return matrix


def probe_diagonal(ctx: OperatorContext, point_source: bool = True) -> np.ndarray:
    """diag(A) from 2 N_s unit probes e_j^T A e_j"""
    n = ctx.dimension
    diagonal = np.empty(n)
    unit = np.zeros(n)
    for j in range(n):
        if point_source:
            diagonal[j] = apply_A_point_source(ctx, j)[j]
        else:
            unit[j] = 1.0
            diagonal[j] = apply_A(ctx, unit)[j]
            unit[j] = 0.0
    return diagonal


def stokes_solution(ctx: OperatorContext, sigma: np.ndarray) -> StokesField:
    """Full radiation field I = Lambda T sigma + t of a solved sigma"""
    sigma = check_sigma(sigma, ctx.grid.n_s)
    intensity = ctx.params.incoming_intensity
    return ctx.sweep.solve(apply_T(sigma, ctx.grid), incoming_up=(intensity, 0.0))
