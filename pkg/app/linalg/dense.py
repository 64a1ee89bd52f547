"""
Dense LU with partial pivoting
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as scla

from app.core.errors import ContractViolation, SingularMatrixError


@dataclass(frozen=True, eq=False)
class LUFactorization:
    """Packed unit-lower L and upper U with LAPACK pivot indices"""
    lu: np.ndarray
    piv: np.ndarray

    @property
    def order(self) -> int:
        return self.lu.shape[0]

    @property
    def lower(self) -> np.ndarray:
        return np.tril(self.lu, k=-1) + np.eye(self.order)

    @property
    def upper(self) -> np.ndarray:
        return np.triu(self.lu)

    @property
    def permutation(self) -> np.ndarray:
        """Row order p such that A[p] = L U"""
        perm = np.arange(self.order)
        for i, target in enumerate(self.piv):
            perm[i], perm[target] = perm[target], perm[i]
        return perm


def lu_factor(matrix: np.ndarray) -> LUFactorization:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ContractViolation(f"LU needs a square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ContractViolation("matrix has non-finite entries")
    lu, piv = scla.lu_factor(matrix, check_finite=False)
    zero = np.flatnonzero(np.diag(lu) == 0.0)
    if zero.size:
        raise SingularMatrixError(f"exactly zero pivot at position {zero[0]}")
    return LUFactorization(lu, piv)


def lu_solve(factorization: LUFactorization, b: np.ndarray) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.shape[0] != factorization.order:
        raise ContractViolation(f"rhs length {b.shape[0]} does not match order {factorization.order}")
    return scla.lu_solve((factorization.lu, factorization.piv), b, check_finite=False)
