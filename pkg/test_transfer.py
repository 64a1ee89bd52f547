"""
Formal solvers, source construction and radiation-field reduction
"""
import numpy as np
import pytest

from app.core.errors import ContractViolation
from app.physics.discretization import build_grid
from app.physics.transfer import (
    SourceField,
    StokesField,
    apply_J,
    apply_Lambda,
    apply_T,
    boundary_field,
    formal_solve_ray,
    interleave,
    pol_tensor,
    step_coefficients,
)
from app.schemas.model import FormalSolverKind, ModelParams

DELO = FormalSolverKind.DELO_LINEAR
EULER = FormalSolverKind.IMPLICIT_EULER


@pytest.mark.parametrize("kind", [DELO, EULER])
def test_step_weights_preserve_constant_sources(kind):
    delta = np.array([1e-9, 1e-6, 5e-5, 9.99e-5, 1e-4, 1e-3, 0.1, 1.0, 30.0, 1e4])
    coeffs = step_coefficients(delta, kind)
    np.testing.assert_allclose(coeffs.attenuation + coeffs.weight_prev + coeffs.weight_next, 1.0, atol=1e-14)


def test_delo_weights_are_continuous_at_taylor_switch():
    below = step_coefficients(np.array([1e-4 * (1 - 1e-9)]), DELO)
    above = step_coefficients(np.array([1e-4 * (1 + 1e-9)]), DELO)
    np.testing.assert_allclose(below.weight_next, above.weight_next, rtol=1e-7)
    np.testing.assert_allclose(below.weight_prev, above.weight_prev, rtol=1e-7)


def test_implicit_euler_weights():
    coeffs = step_coefficients(np.array([0.5]), EULER)
    assert coeffs.attenuation[0] == pytest.approx(2.0 / 3.0)
    assert coeffs.weight_prev[0] == 0.0
    assert coeffs.weight_next[0] == pytest.approx(1.0 / 3.0)


def exact_linear_source_solution(grid, mu, nu_index, alpha, beta, boundary):
    """Analytic I along a ray for S(tau) = alpha + beta tau entering with `boundary`"""
    tau, phi = grid.tau, grid.phi[nu_index]
    start = tau[-1] if mu > 0 else tau[0]
    distance = np.abs(tau - start) * phi / abs(mu)
    slope = beta * (-mu) / phi  # dS / d(distance travelled)
    source = alpha + beta * tau
    return source - slope + (boundary - (alpha + beta * start) + slope) * np.exp(-distance)


@pytest.mark.parametrize("mu", [0.5, -0.5, 0.9])
@pytest.mark.parametrize("beta", [0.0, 0.3])
def test_delo_linear_is_exact_for_linear_sources(mu, beta):
    grid = build_grid(30, 2, 3, tau_min=0.1, tau_max=10.0)
    alpha, boundary = 2.0, 0.7
    source_I = alpha + beta * grid.tau
    intensity, polarization = formal_solve_ray(
        source_I, np.zeros(grid.n_s), mu, 1, grid, DELO, boundary=(boundary, 0.0)
    )
    expected = exact_linear_source_solution(grid, mu, 1, alpha, beta, boundary)
    np.testing.assert_allclose(intensity, expected, rtol=1e-12, atol=1e-12)
    assert np.all(polarization == 0.0)


def test_implicit_euler_converges_at_first_order():
    errors = []
    for n_s in (21, 41, 81):
        grid = build_grid(n_s, 2, 3, tau_min=0.1, tau_max=2.0)
        intensity, _ = formal_solve_ray(np.ones(n_s), np.zeros(n_s), 1.0, 1, grid, EULER)
        exact = 1.0 - np.exp(-(grid.tau[-1] - grid.tau[0]) * grid.phi[1])
        errors.append(abs(intensity[0] - exact))
    ratios = np.array(errors[:-1]) / np.array(errors[1:])
    np.testing.assert_allclose(ratios, 2.0, atol=0.4)


def test_formal_solution_rejects_horizontal_ray():
    grid = build_grid(5, 2, 3)
    with pytest.raises(ContractViolation):
        formal_solve_ray(np.ones(5), np.zeros(5), 0.0, 0, grid, DELO)


def test_apply_T_builds_sources_from_sigma():
    grid = build_grid(4, 4, 3)
    t1, t2 = pol_tensor(grid.mu_nodes)
    sigma = interleave(np.full(4, 2.0), np.full(4, 0.5))
    source = apply_T(sigma, grid)
    np.testing.assert_allclose(source.S_I, 2.0 + 0.5 * t1[None, :].repeat(4, axis=0))
    np.testing.assert_allclose(source.S_Q, 0.5 * t2[None, :].repeat(4, axis=0))
    with pytest.raises(ContractViolation):
        apply_T(np.ones(7), grid)


def test_lambda_of_unit_source_stays_within_unit_interval():
    grid = build_grid(10, 4, 5)
    ones = np.ones((grid.n_s, grid.n_mu))
    field = apply_Lambda(SourceField(ones, np.zeros_like(ones)), grid, DELO)
    assert field.I.shape == (10, 4, 5)
    assert np.all(field.I >= 0.0) and np.all(field.I <= 1.0 + 1e-14)
    assert np.all(field.Q == 0.0)
    # no incoming radiation: the first node of every ray is zero
    n_down = grid.n_mu // 2
    assert np.all(field.I[0, :n_down] == 0.0)
    assert np.all(field.I[-1, n_down:] == 0.0)


def test_boundary_field_carries_bottom_illumination_upward():
    grid = build_grid(10, 4, 5)
    field = boundary_field(grid, DELO)
    n_down = grid.n_mu // 2
    assert np.all(field.I[:, :n_down] == 0.0)
    np.testing.assert_allclose(field.I[-1, n_down:], 1.0)
    assert np.all(np.diff(field.I[:, n_down:], axis=0) >= 0.0)


def test_isotropic_unpolarized_field_has_no_anisotropy():
    grid = build_grid(6, 8, 7)
    params = ModelParams(epsilon=0.25)
    shape = (grid.n_s, grid.n_mu, grid.n_nu)
    reduced = apply_J(StokesField(np.ones(shape), np.zeros(shape)), grid, params)
    np.testing.assert_allclose(reduced[1::2], 0.0, atol=1e-14)
    np.testing.assert_allclose(reduced[0::2], params.xi * grid.profile_mass, rtol=1e-13)


def test_apply_J_checks_field_shape():
    grid = build_grid(6, 2, 3)
    with pytest.raises(ContractViolation):
        apply_J(StokesField(np.ones((6, 2, 4)), np.zeros((6, 2, 4))), grid, ModelParams())
