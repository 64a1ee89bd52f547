"""
Physical mappings of the discrete problem: sources T, formal solution Lambda, boundary term t and
radiation-field-tensor reduction J.

Depth index k runs from the top (tau_min) to the bottom (tau_max). Rays with mu > 0 propagate
upward and are swept from the bottom node; rays with mu < 0 are swept from the top node.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from app.core.errors import ContractViolation
from app.physics.discretization import Grid
from app.schemas.model import FormalSolverKind, ModelParams

SQRT2 = np.sqrt(2.0)

# below this optical step the DELO-linear weights use their Taylor expansions
TAYLOR_SWITCH = 1e-4


def pol_tensor(mu) -> Tuple[np.ndarray, np.ndarray]:
    """Polarization tensor components T^2_{0,1}(mu) and T^2_{0,2}(mu) for gamma = 0"""
    mu = np.asarray(mu, dtype=float)
    mu2 = mu * mu
    return SQRT2 * (3.0 * mu2 - 1.0) / 4.0, SQRT2 * (3.0 * mu2 - 3.0) / 4.0


def check_sigma(sigma: np.ndarray, n_s: int) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (2 * n_s,):
        raise ContractViolation(f"sigma must have shape ({2 * n_s},), got {sigma.shape}")
    return sigma


def interleave(sigma00: np.ndarray, sigma20: np.ndarray) -> np.ndarray:
    """[s00(z1), s20(z1), s00(z2), ...]"""
    out = np.empty(2 * len(sigma00))
    out[0::2] = sigma00
    out[1::2] = sigma20
    return out


@dataclass(frozen=True, eq=False)
class SourceField:
    S_I: np.ndarray  # (N_s, N_mu)
    S_Q: np.ndarray


@dataclass(frozen=True, eq=False)
class StokesField:
    I: np.ndarray  # (N_s, N_mu, N_nu)
    Q: np.ndarray

    @classmethod
    def zeros(cls, grid: Grid) -> "StokesField":
        shape = (grid.n_s, grid.n_mu, grid.n_nu)
        return cls(np.zeros(shape), np.zeros(shape))


@dataclass(frozen=True, eq=False)
class StepCoefficients:
    """
    Per-step weights of a one-step formal solver:

        X_next = attenuation * X_prev + weight_prev * S_prev + weight_next * S_next

    Leading axis indexes the step between depth nodes k and k + 1.
    """
    attenuation: np.ndarray
    weight_prev: np.ndarray
    weight_next: np.ndarray

    def take(self, index) -> "StepCoefficients":
        return StepCoefficients(
            self.attenuation[index], self.weight_prev[index], self.weight_next[index]
        )


def step_coefficients(delta: np.ndarray, kind: FormalSolverKind) -> StepCoefficients:
    delta = np.asarray(delta, dtype=float)
    if kind == FormalSolverKind.IMPLICIT_EULER:
        attenuation = 1.0 / (1.0 + delta)
        return StepCoefficients(attenuation, np.zeros_like(delta), delta * attenuation)

    one_minus_e = -np.expm1(-delta)
    ratio = one_minus_e / delta
    small = delta < TAYLOR_SWITCH
    d2, d3, d4 = delta ** 2, delta ** 3, delta ** 4
    weight_next = np.where(small, delta / 2 - d2 / 6 + d3 / 24 - d4 / 120, 1.0 - ratio)
    weight_prev = np.where(small, delta / 2 - d2 / 3 + d3 / 8 - d4 / 30, one_minus_e + ratio - 1.0)
    return StepCoefficients(np.exp(-delta), weight_prev, weight_next)


def propagate(coeffs: StepCoefficients, source: np.ndarray, incoming, upward: bool) -> np.ndarray:
    """
    Sweep the one-step recurrence along the depth axis (axis 0 of `source`).

    Trailing axes of `source`, of the coefficients and of `incoming` broadcast together,
    so one call handles a single ray or every ray of a hemisphere.
    """
    n = source.shape[0]
    incoming = np.asarray(incoming, dtype=float)
    shape = np.broadcast_shapes(source.shape[1:], coeffs.attenuation.shape[1:], incoming.shape)
    out = np.empty((n, *shape))
    a, bp, bn = coeffs.attenuation, coeffs.weight_prev, coeffs.weight_next
    if upward:
        out[n - 1] = incoming
        for k in range(n - 2, -1, -1):
            out[k] = a[k] * out[k + 1] + bp[k] * source[k + 1] + bn[k] * source[k]
    else:
        out[0] = incoming
        for k in range(1, n):
            out[k] = a[k - 1] * out[k - 1] + bp[k - 1] * source[k - 1] + bn[k - 1] * source[k]
    return out


def optical_steps(grid: Grid) -> np.ndarray:
    """Monochromatic ray steps delta[k, m, p] = |tau_{k+1} - tau_k| phi_p / |mu_m|"""
    dtau = np.diff(grid.tau)
    return dtau[:, None, None] * grid.phi[None, None, :] / np.abs(grid.mu_nodes)[None, :, None]


@dataclass(frozen=True, eq=False)
class RaySweep:
    """Formal-solver weights for every ray of a grid, split by hemisphere"""
    n_down: int
    down: StepCoefficients  # mu < 0, (N_s - 1, n_down, N_nu)
    up: StepCoefficients    # mu > 0

    @classmethod
    def build(cls, grid: Grid, kind: FormalSolverKind) -> "RaySweep":
        coeffs = step_coefficients(optical_steps(grid), kind)
        n_down = int(np.count_nonzero(grid.mu_nodes < 0))
        return cls(
            n_down=n_down,
            down=coeffs.take((slice(None), slice(0, n_down))),
            up=coeffs.take((slice(None), slice(n_down, None))),
        )

    def solve(self, source: SourceField, incoming_up=(0.0, 0.0), incoming_down=(0.0, 0.0)) -> StokesField:
        """Formal solution of I and Q on all rays, given incoming (I, Q) at the ray starts"""
        stacked = np.stack([source.S_I, source.S_Q], axis=1)[..., None]  # (N_s, 2, N_mu, 1)
        nd = self.n_down
        down = propagate(self.down, stacked[:, :, :nd], np.asarray(incoming_down, float)[:, None, None], upward=False)
        up = propagate(self.up, stacked[:, :, nd:], np.asarray(incoming_up, float)[:, None, None], upward=True)
        full = np.concatenate([down, up], axis=2)
        return StokesField(full[:, 0], full[:, 1])


@lru_cache(maxsize=32)
def ray_sweep(grid: Grid, kind: FormalSolverKind) -> RaySweep:
    return RaySweep.build(grid, kind)


def apply_T(sigma: np.ndarray, grid: Grid) -> SourceField:
    """S_I = s00 + T1(mu) s20, S_Q = T2(mu) s20"""
    sigma = check_sigma(sigma, grid.n_s)
    s00, s20 = sigma[0::2], sigma[1::2]
    t1, t2 = pol_tensor(grid.mu_nodes)
    return SourceField(
        S_I=s00[:, None] + t1[None, :] * s20[:, None],
        S_Q=t2[None, :] * s20[:, None],
    )


def formal_solve_ray(
    source_I: np.ndarray,
    source_Q: np.ndarray,
    mu: float,
    nu_index: int,
    grid: Grid,
    kind: FormalSolverKind,
    boundary: Tuple[float, float] = (0.0, 0.0),
) -> Tuple[np.ndarray, np.ndarray]:
    """Formal solution along one (mu, nu_p) ray, sweeping in the propagation direction"""
    if mu == 0.0:
        raise ContractViolation("mu = 0 ray has no vertical propagation")
    source = np.stack([np.asarray(source_I, float), np.asarray(source_Q, float)], axis=1)
    if source.shape != (grid.n_s, 2):
        raise ContractViolation(f"sources must have length {grid.n_s}")
    delta = np.diff(grid.tau) * grid.phi[nu_index] / abs(mu)
    out = propagate(step_coefficients(delta, kind), source, boundary, upward=mu > 0)
    return out[:, 0], out[:, 1]


def apply_Lambda(S: SourceField, grid: Grid, kind: FormalSolverKind) -> StokesField:
    """Lambda S with zero incoming radiation on every ray"""
    shape = (grid.n_s, grid.n_mu)
    if S.S_I.shape != shape or S.S_Q.shape != shape:
        raise ContractViolation(f"source field must have shape {shape}")
    return ray_sweep(grid, kind).solve(S)


def boundary_field(grid: Grid, kind: FormalSolverKind, params: ModelParams | None = None) -> StokesField:
    """Radiation transmitted from the boundaries: unpolarized beam entering at the bottom"""
    intensity = (params or ModelParams()).incoming_intensity
    zero = np.zeros((grid.n_s, grid.n_mu))
    return ray_sweep(grid, kind).solve(SourceField(zero, zero), incoming_up=(intensity, 0.0))


def apply_J(field: StokesField, grid: Grid, params: ModelParams) -> np.ndarray:
    """xi [J00(z1), J20(z1), ...]; the epsilon term is added by the right-hand side"""
    shape = (grid.n_s, grid.n_mu, grid.n_nu)
    if field.I.shape != shape or field.Q.shape != shape:
        raise ContractViolation(f"Stokes field must have shape {shape}")
    t1, t2 = pol_tensor(grid.mu_nodes)
    w = grid.mu_weights
    spectral = grid.nu_weights * grid.phi / 2.0
    angular00 = np.einsum("kmp,m->kp", field.I, w)
    angular20 = np.einsum("kmp,m->kp", field.I, w * t1) + np.einsum("kmp,m->kp", field.Q, w * t2)
    return params.xi * interleave(angular00 @ spectral, angular20 @ spectral)
