"""
Shared fixtures: small benchmark grids, their operators and assembled matrices
"""
import numpy as np
import pytest

from app.physics.discretization import build_grid
from app.physics.operator import OperatorContext, assemble_A
from app.schemas.model import FormalSolverKind, ModelParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_ctx():
    """Factory for operator contexts on the benchmark atmosphere"""
    def factory(n_s=8, n_mu=4, n_nu=4, epsilon=1e-4, kind=FormalSolverKind.DELO_LINEAR, **grid_kwargs):
        params = ModelParams(epsilon=epsilon)
        return OperatorContext(build_grid(n_s, n_mu, n_nu, params=params, **grid_kwargs), params, kind)
    return factory


@pytest.fixture(scope="session")
def small_ctx():
    params = ModelParams(epsilon=1e-4)
    return OperatorContext(build_grid(12, 4, 5, params=params), params)


@pytest.fixture(scope="session")
def small_matrix(small_ctx):
    return assemble_A(small_ctx)


@pytest.fixture
def write_config(tmp_path):
    """Write a TOML experiment file whose outputs land under tmp_path"""
    def factory(body: str, name: str = "experiment.toml") -> str:
        path = tmp_path / name
        path.write_text(f'output_dir = "{(tmp_path / "out").as_posix()}"\n' + body)
        return str(path)
    return factory
