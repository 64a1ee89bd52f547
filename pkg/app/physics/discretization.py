"""
Spatial, angular and spectral grids of the discrete problem
"""
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import wofz

from app.core.config import settings
from app.core.errors import ConfigurationError
from app.schemas.model import ModelParams

SQRT_PI = np.sqrt(np.pi)


def build_tau_grid(n_points: int, tau_min: float = settings.TAU_MIN, tau_max: float = settings.TAU_MAX) -> np.ndarray:
    """Logarithmically spaced optical depths, tau_min at the top, tau_max at the bottom"""
    if n_points < 2:
        raise ConfigurationError(f"tau grid needs at least 2 points, got {n_points}")
    if not 0.0 < tau_min < tau_max:
        raise ConfigurationError(f"invalid tau bounds ({tau_min}, {tau_max})")
    exponents = np.arange(n_points) / (n_points - 1)
    tau = tau_min * (tau_max / tau_min) ** exponents
    tau[0], tau[-1] = tau_min, tau_max
    return tau


def gauss_legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes (ascending) and weights on [-1, 1]"""
    if n < 1:
        raise ConfigurationError(f"Gauss-Legendre order must be positive, got {n}")
    nodes, weights = leggauss(n)
    return nodes, weights


def build_frequency_grid(n: int, x_min: float = settings.NU_MIN, x_max: float = settings.NU_MAX) -> Tuple[np.ndarray, np.ndarray]:
    """Equally spaced reduced frequencies with trapezoidal weights"""
    if n < 2:
        raise ConfigurationError(f"frequency grid needs at least 2 points, got {n}")
    if not x_min < x_max:
        raise ConfigurationError(f"invalid frequency bounds ({x_min}, {x_max})")
    nodes = np.linspace(x_min, x_max, n)
    h = (x_max - x_min) / (n - 1)
    weights = np.full(n, h)
    weights[0] = weights[-1] = h / 2.0
    return nodes, weights


def voigt_profile(x, a: float):
    """
    Normalized Voigt profile phi(x) = H(a, x) / sqrt(pi).

    H(a, x) = Re w(x + i a), w being the Faddeeva function, so H(0, x) = exp(-x^2).
    """
    if a < 0:
        raise ConfigurationError(f"damping must be non-negative, got {a}")
    return np.real(wofz(np.asarray(x, dtype=float) + 1j * a)) / SQRT_PI


@dataclass(frozen=True, eq=False)
class Grid:
    """Immutable discretization shared by every operator application"""
    tau: np.ndarray
    mu_nodes: np.ndarray
    mu_weights: np.ndarray
    nu_nodes: np.ndarray
    nu_weights: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        for array in (self.tau, self.mu_nodes, self.mu_weights, self.nu_nodes, self.nu_weights, self.phi):
            array.setflags(write=False)

    @property
    def n_s(self) -> int:
        return self.tau.size

    @property
    def n_mu(self) -> int:
        return self.mu_nodes.size

    @property
    def n_nu(self) -> int:
        return self.nu_nodes.size

    @property
    def dimension(self) -> int:
        return 2 * self.n_s

    @property
    def profile_mass(self) -> float:
        """Discrete spectral quadrature of the profile; not renormalized to 1"""
        return float(np.dot(self.nu_weights, self.phi))

    def to_snapshot(self) -> Dict[str, Any]:
        """JSON-serializable description for reproducibility"""
        return {
            "n_s": self.n_s,
            "n_mu": self.n_mu,
            "n_nu": self.n_nu,
            "tau": self.tau.tolist(),
            "mu_nodes": self.mu_nodes.tolist(),
            "mu_weights": self.mu_weights.tolist(),
            "nu_nodes": self.nu_nodes.tolist(),
            "nu_weights": self.nu_weights.tolist(),
            "phi": self.phi.tolist(),
            "profile_mass": self.profile_mass,
        }


def build_grid(
    n_s: int,
    n_mu: int,
    n_nu: int,
    params: ModelParams | None = None,
    tau_min: float = settings.TAU_MIN,
    tau_max: float = settings.TAU_MAX,
    nu_min: float = settings.NU_MIN,
    nu_max: float = settings.NU_MAX,
) -> Grid:
    """Benchmark grid: log tau, Gauss-Legendre mu, trapezoidal nu, Voigt profile"""
    params = params or ModelParams()
    mu_nodes, mu_weights = gauss_legendre(n_mu)
    if n_mu % 2:
        raise ConfigurationError(f"n_mu={n_mu} puts a node at mu=0; use an even count")
    nu_nodes, nu_weights = build_frequency_grid(n_nu, nu_min, nu_max)
    return Grid(
        tau=build_tau_grid(n_s, tau_min, tau_max),
        mu_nodes=mu_nodes,
        mu_weights=mu_weights,
        nu_nodes=nu_nodes,
        nu_weights=nu_weights,
        phi=voigt_profile(nu_nodes, params.damping_a),
    )
