"""
Dense LU, sparse triangular factors and Matrix Market files
"""
import numpy as np
import pytest
import scipy.sparse as sp
from scipy.linalg import solve_triangular

from app.core.errors import ContractViolation, SingularMatrixError
from app.linalg.dense import lu_factor, lu_solve
from app.linalg.matrix_market import read_matrix_market, write_matrix_market
from app.linalg.sparse import SparseTriangular, sparse_triangular_solve
from app.physics.operator import apply_A


def test_lu_solves_random_system(rng):
    matrix = rng.standard_normal((30, 30)) + 5.0 * np.eye(30)
    b = rng.standard_normal(30)
    x = lu_solve(lu_factor(matrix), b)
    np.testing.assert_allclose(x, np.linalg.solve(matrix, b), rtol=1e-12, atol=1e-12)


def test_lu_factors_reproduce_permuted_matrix(rng):
    matrix = rng.standard_normal((12, 12))
    factorization = lu_factor(matrix)
    np.testing.assert_allclose(
        matrix[factorization.permutation], factorization.lower @ factorization.upper, atol=1e-12
    )
    assert np.allclose(np.diag(factorization.lower), 1.0)


def test_lu_rejects_singular_and_non_square():
    with pytest.raises(SingularMatrixError):
        lu_factor(np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(ContractViolation):
        lu_factor(np.ones((2, 3)))
    with pytest.raises(ContractViolation):
        lu_factor(np.array([[1.0, np.nan], [0.0, 1.0]]))


def test_lu_checks_rhs_length():
    with pytest.raises(ContractViolation):
        lu_solve(lu_factor(np.eye(3)), np.ones(4))


@pytest.mark.parametrize("lower", [True, False])
def test_triangular_solve_matches_dense(rng, lower):
    dense = rng.standard_normal((15, 15)) + 4.0 * np.eye(15)
    factor = SparseTriangular.from_dense(dense, lower=lower)
    b = rng.standard_normal(15)
    expected = solve_triangular(np.tril(dense) if lower else np.triu(dense), b, lower=lower)
    np.testing.assert_allclose(sparse_triangular_solve(factor, b), expected, rtol=1e-12)
    np.testing.assert_allclose(factor @ b, factor.to_dense() @ b)


def test_unit_diagonal_is_implicit(rng):
    dense = np.tril(rng.standard_normal((8, 8)), k=-1)
    factor = SparseTriangular.from_dense(dense + 7.0 * np.eye(8), lower=True, unit_diagonal=True)
    np.testing.assert_allclose(factor.to_dense(), dense + np.eye(8))
    b = rng.standard_normal(8)
    np.testing.assert_allclose(
        sparse_triangular_solve(factor, b), solve_triangular(dense + np.eye(8), b, lower=True), rtol=1e-12
    )


@pytest.mark.parametrize("lower,unit", [(True, False), (False, False), (True, True)])
def test_triangular_solve_inverts_multiply(rng, lower, unit):
    dense = 0.2 * rng.standard_normal((20, 20)) + 6.0 * np.eye(20)
    factor = SparseTriangular.from_dense(dense, lower=lower, unit_diagonal=unit)
    x = rng.standard_normal(20)
    np.testing.assert_allclose(sparse_triangular_solve(factor, factor @ x), x, rtol=1e-10, atol=1e-12)


def test_triangular_storage_is_validated():
    with pytest.raises(ContractViolation):
        SparseTriangular(sp.csr_matrix(np.array([[1.0, 2.0], [0.0, 1.0]])), lower=True)
    with pytest.raises(SingularMatrixError):
        SparseTriangular(sp.csr_matrix(np.array([[1.0, 0.0], [3.0, 0.0]])), lower=True)
    with pytest.raises(ContractViolation):
        sparse_triangular_solve(SparseTriangular.from_dense(np.eye(3), lower=True), np.ones(2))


def test_dense_export_is_bit_exact(tmp_path, rng):
    matrix = rng.standard_normal((7, 7)) * 10.0 ** rng.integers(-8, 8, size=(7, 7))
    path = write_matrix_market(tmp_path / "dense.mtx", matrix)
    assert "array" in path.read_text().splitlines()[0]
    assert np.array_equal(read_matrix_market(path), matrix)


def test_sparse_export_uses_coordinate_format(tmp_path):
    matrix = sp.csr_matrix(np.array([[1.0 / 3.0, 0.0, 0.0], [0.0, 2.0, 0.0], [np.pi, 0.0, 1e-300]]))
    path = write_matrix_market(tmp_path / "factor.mtx", matrix, comment="factor")
    assert "coordinate" in path.read_text().splitlines()[0]
    restored = read_matrix_market(path)
    assert sp.issparse(restored)
    assert restored.nnz == 4
    assert np.array_equal(restored.toarray(), matrix.toarray())


def test_exported_operator_reproduces_matrix_free_action(tmp_path, small_ctx, small_matrix, rng):
    restored = read_matrix_market(write_matrix_market(tmp_path / "A.mtx", small_matrix))
    for _ in range(5):
        x = rng.standard_normal(small_ctx.dimension)
        y = apply_A(small_ctx, x)
        assert np.linalg.norm(restored @ x - y) <= 1e-12 * np.linalg.norm(y)
