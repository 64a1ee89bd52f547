"""
Sparse triangular storage and substitution
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve_triangular

from app.core.errors import ContractViolation, SingularMatrixError


@dataclass(frozen=True, eq=False)
class SparseTriangular:
    """CSR lower- or upper-triangular square matrix"""
    matrix: sp.csr_matrix
    lower: bool
    unit_diagonal: bool = False

    def __post_init__(self):
        rows, cols = self.matrix.shape
        if rows != cols:
            raise ContractViolation(f"triangular factor must be square, got {self.matrix.shape}")
        coo = self.matrix.tocoo()
        wrong_side = coo.col > coo.row if self.lower else coo.col < coo.row
        if np.any(wrong_side & (coo.data != 0.0)):
            raise ContractViolation("stored entries on the wrong side of the diagonal")
        if not self.unit_diagonal and np.any(self.matrix.diagonal() == 0.0):
            raise SingularMatrixError("zero diagonal entry in triangular factor")

    @classmethod
    def from_dense(cls, dense: np.ndarray, lower: bool, unit_diagonal: bool = False) -> "SparseTriangular":
        part = np.tril(dense) if lower else np.triu(dense)
        if unit_diagonal:
            np.fill_diagonal(part, 0.0)
        return cls(sp.csr_matrix(part), lower, unit_diagonal)

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def to_dense(self) -> np.ndarray:
        dense = self.matrix.toarray()
        if self.unit_diagonal:
            np.fill_diagonal(dense, 1.0)
        return dense

    def __matmul__(self, x: np.ndarray) -> np.ndarray:
        out = self.matrix @ x
        return out + x if self.unit_diagonal else out


def sparse_triangular_solve(factor: SparseTriangular, b: np.ndarray) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.shape[0] != factor.shape[0]:
        raise ContractViolation(f"rhs length {b.shape[0]} does not match order {factor.shape[0]}")
    return spsolve_triangular(factor.matrix, b, lower=factor.lower, unit_diagonal=factor.unit_diagonal)
