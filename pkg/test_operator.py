"""
System matrix A = Id - J Lambda T: matrix-free action, assembly and right-hand side
"""
import math

import numpy as np
import pytest

from app.core.errors import ContractViolation
from app.physics.discretization import build_grid
from app.physics.operator import (
    OperatorContext,
    apply_A,
    apply_A_point_source,
    assemble_A,
    build_rhs,
    probe_diagonal,
    stokes_solution,
)
from app.schemas.model import FormalSolverKind, ModelParams

DELO = FormalSolverKind.DELO_LINEAR
EULER = FormalSolverKind.IMPLICIT_EULER


def scalar_delo(delta):
    """(attenuation, weight_prev, weight_next) straight from the closed form"""
    e = math.exp(-delta)
    one_minus_e = -math.expm1(-delta)
    return e, one_minus_e + one_minus_e / delta - 1.0, 1.0 - one_minus_e / delta


def explicit_operator(grid, params, boundary_intensity=0.0, sigma=None):
    """
    Loop-by-loop evaluation of J Lambda T sigma (+ J t when illuminated), ray by ray and node by node
    """
    n_s = grid.n_s
    sigma = np.zeros(2 * n_s) if sigma is None else sigma
    j00 = np.zeros(n_s)
    j20 = np.zeros(n_s)
    for m, mu in enumerate(grid.mu_nodes):
        t1 = math.sqrt(2.0) * (3.0 * mu * mu - 1.0) / 4.0
        t2 = math.sqrt(2.0) * (3.0 * mu * mu - 3.0) / 4.0
        s_i = [sigma[2 * k] + t1 * sigma[2 * k + 1] for k in range(n_s)]
        s_q = [t2 * sigma[2 * k + 1] for k in range(n_s)]
        for p, phi in enumerate(grid.phi):
            i_ray = [0.0] * n_s
            q_ray = [0.0] * n_s
            order = list(range(n_s - 1, -1, -1)) if mu > 0 else list(range(n_s))
            i_ray[order[0]] = boundary_intensity if mu > 0 else 0.0
            for prev, node in zip(order, order[1:]):
                delta = abs(grid.tau[node] - grid.tau[prev]) * phi / abs(mu)
                a, bp, bn = scalar_delo(delta)
                i_ray[node] = a * i_ray[prev] + bp * s_i[prev] + bn * s_i[node]
                q_ray[node] = a * q_ray[prev] + bp * s_q[prev] + bn * s_q[node]
            weight = grid.mu_weights[m] * grid.nu_weights[p] * phi / 2.0
            for k in range(n_s):
                j00[k] += weight * i_ray[k]
                j20[k] += weight * (t1 * i_ray[k] + t2 * q_ray[k])
    out = np.empty(2 * n_s)
    out[0::2] = params.xi * j00
    out[1::2] = params.xi * j20
    return out


def test_assembled_matrix_matches_explicit_oracle():
    params = ModelParams(epsilon=1e-4)
    grid = build_grid(3, 2, 2, params=params)
    ctx = OperatorContext(grid, params, DELO)
    expected = np.empty((6, 6))
    for j in range(6):
        unit = np.zeros(6)
        unit[j] = 1.0
        expected[:, j] = unit - explicit_operator(grid, params, sigma=unit)
    np.testing.assert_allclose(assemble_A(ctx), expected, rtol=0.0, atol=1e-12)

    rhs = explicit_operator(grid, params, boundary_intensity=1.0)
    rhs[0::2] += params.epsilon
    np.testing.assert_allclose(build_rhs(ctx), rhs, rtol=0.0, atol=1e-12)


@pytest.mark.parametrize("kind", [DELO, EULER])
def test_matrix_free_action_matches_assembled_matrix(make_ctx, rng, kind):
    ctx = make_ctx(n_s=16, n_mu=6, n_nu=7, kind=kind)
    matrix = assemble_A(ctx)
    for _ in range(10):
        x = rng.standard_normal(ctx.dimension)
        y = apply_A(ctx, x)
        assert np.linalg.norm(y - matrix @ x) <= 1e-12 * np.linalg.norm(y)


@pytest.mark.parametrize("kind", [DELO, EULER])
def test_point_source_columns_equal_full_sweeps(make_ctx, kind):
    ctx = make_ctx(n_s=10, n_mu=4, n_nu=5, kind=kind)
    np.testing.assert_allclose(
        assemble_A(ctx, point_source=True), assemble_A(ctx, point_source=False), rtol=0.0, atol=1e-13
    )


def test_point_source_rejects_bad_column(make_ctx):
    ctx = make_ctx()
    with pytest.raises(ContractViolation):
        apply_A_point_source(ctx, ctx.dimension)


def test_matrix_free_diagonal_matches_matrix(small_ctx, small_matrix):
    np.testing.assert_allclose(probe_diagonal(small_ctx), np.diag(small_matrix), atol=1e-14)
    np.testing.assert_allclose(probe_diagonal(small_ctx, point_source=False), np.diag(small_matrix), atol=1e-14)


def test_pure_thermalization_gives_identity(make_ctx):
    ctx = make_ctx(n_s=7, epsilon=1.0)
    assert np.array_equal(assemble_A(ctx), np.eye(14))
    expected = np.zeros(14)
    expected[0::2] = 1.0
    assert np.array_equal(build_rhs(ctx), expected)


def test_rhs_layout(small_ctx):
    b = build_rhs(small_ctx)
    assert b.shape == (2 * small_ctx.grid.n_s,)
    # bottom illumination adds to the thermal term at every depth
    assert np.all(b[0::2] > small_ctx.params.epsilon)


def test_apply_A_rejects_wrong_length(small_ctx):
    with pytest.raises(ContractViolation):
        apply_A(small_ctx, np.ones(3))


def test_linear_operator_wraps_apply_A(small_ctx, rng):
    x = rng.standard_normal(small_ctx.dimension)
    np.testing.assert_allclose(small_ctx.linear_operator() @ x, apply_A(small_ctx, x))


def test_stokes_solution_of_thermal_source(make_ctx):
    ctx = make_ctx(n_s=9, epsilon=1.0)
    sigma = np.zeros(18)
    sigma[0::2] = 1.0
    field = stokes_solution(ctx, sigma)
    n_down = ctx.grid.n_mu // 2
    # unit source with unit bottom illumination keeps upward rays at 1
    np.testing.assert_allclose(field.I[:, n_down:], 1.0, atol=1e-13)
    assert np.all(field.I[0, :n_down] == 0.0)
    np.testing.assert_allclose(field.Q, 0.0, atol=1e-15)
