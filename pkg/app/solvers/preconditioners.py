"""
Preconditioners applied as v -> P^{-1} v: Jacobi, SOR, SSOR and threshold ILU
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from app.core.errors import ConfigurationError, ContractViolation, FactorizationError, SingularMatrixError
from app.linalg.sparse import SparseTriangular, sparse_triangular_solve
from app.schemas.solver import PreconditionerKind, SORVariant

logger = logging.getLogger(__name__)


class Preconditioner(ABC):
    """Precomputed data sufficient to apply P^{-1}"""
    kind: PreconditionerKind

    @property
    @abstractmethod
    def order(self) -> int:
        ...

    @abstractmethod
    def _solve(self, v: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def to_dense(self) -> np.ndarray:
        """P itself, reconstructed from the stored factors"""

    def apply(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.order,):
            raise ContractViolation(f"vector length {v.shape} does not match order {self.order}")
        return self._solve(v)

    def linear_operator(self) -> LinearOperator:
        n = self.order
        return LinearOperator((n, n), matvec=lambda v: self.apply(np.ravel(v)), dtype=float)


@dataclass(frozen=True, eq=False)
class IdentityPreconditioner(Preconditioner):
    n: int
    kind = PreconditionerKind.NONE

    @property
    def order(self) -> int:
        return self.n

    def _solve(self, v):
        return v.copy()

    def to_dense(self):
        return np.eye(self.n)


@dataclass(frozen=True, eq=False)
class JacobiPreconditioner(Preconditioner):
    diagonal: np.ndarray
    kind = PreconditionerKind.JACOBI

    @property
    def order(self) -> int:
        return self.diagonal.size

    def _solve(self, v):
        return v / self.diagonal

    def to_dense(self):
        return np.diag(self.diagonal)


@dataclass(frozen=True, eq=False)
class SORPreconditioner(Preconditioner):
    """P = D/omega + U (upper variant) or D/omega + L (lower variant)"""
    factor: SparseTriangular
    omega: float
    kind = PreconditionerKind.SOR

    @property
    def order(self) -> int:
        return self.factor.shape[0]

    @property
    def variant(self) -> SORVariant:
        return SORVariant.LOWER if self.factor.lower else SORVariant.UPPER

    def _solve(self, v):
        return sparse_triangular_solve(self.factor, v)

    def to_dense(self):
        return self.factor.to_dense()


@dataclass(frozen=True, eq=False)
class SSORPreconditioner(Preconditioner):
    """
    P = omega/(2 - omega) Lt Ut with Lt = D/omega + L and Ut = D^{-1} (D/omega + U).

    `upper` stores D/omega + U, so Ut^{-1} w = (D/omega + U)^{-1} D w.
    """
    lower: SparseTriangular
    upper: SparseTriangular
    diagonal: np.ndarray
    omega: float
    kind = PreconditionerKind.SSOR

    @property
    def order(self) -> int:
        return self.diagonal.size

    def _solve(self, v):
        w = sparse_triangular_solve(self.lower, v)
        x = sparse_triangular_solve(self.upper, self.diagonal * w)
        return (2.0 - self.omega) / self.omega * x

    def to_dense(self):
        u_tilde = self.upper.to_dense() / self.diagonal[:, None]
        return self.omega / (2.0 - self.omega) * self.lower.to_dense() @ u_tilde


@dataclass(frozen=True, eq=False)
class ILUTPreconditioner(Preconditioner):
    """P = Lt Ut with unit-lower Lt and upper Ut from threshold-dropping elimination"""
    lower: SparseTriangular
    upper: SparseTriangular
    threshold: float
    kind = PreconditionerKind.ILUT

    @property
    def order(self) -> int:
        return self.upper.shape[0]

    @property
    def nnz(self) -> int:
        return self.lower.nnz + self.order + self.upper.nnz

    def _solve(self, v):
        return sparse_triangular_solve(self.upper, sparse_triangular_solve(self.lower, v))

    def to_dense(self):
        return self.lower.to_dense() @ self.upper.to_dense()


def _square(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ContractViolation(f"preconditioner needs a square matrix, got shape {matrix.shape}")
    return matrix


def _check_omega(omega: float) -> None:
    if not 0.0 < omega < 2.0:
        raise ConfigurationError(f"omega must satisfy 0 < omega < 2, got {omega}")


def _nonzero_diagonal(diagonal: np.ndarray, name: str) -> np.ndarray:
    zero = np.flatnonzero(diagonal == 0.0)
    if zero.size:
        raise SingularMatrixError(f"{name}: zero diagonal entry at row {zero[0]}")
    return diagonal


def build_jacobi(matrix_or_diagonal: np.ndarray) -> JacobiPreconditioner:
    """From an assembled matrix or from a diagonal already probed matrix-free"""
    data = np.asarray(matrix_or_diagonal, dtype=float)
    diagonal = data.copy() if data.ndim == 1 else np.diag(_square(data)).copy()
    return JacobiPreconditioner(_nonzero_diagonal(diagonal, "Jacobi"))


def build_sor(matrix: np.ndarray, omega: float, variant: SORVariant = SORVariant.UPPER) -> SORPreconditioner:
    matrix = _square(matrix)
    _check_omega(omega)
    diagonal = _nonzero_diagonal(np.diag(matrix), "SOR")
    lower = variant == SORVariant.LOWER
    factor = np.tril(matrix, k=-1) if lower else np.triu(matrix, k=1)
    factor[np.diag_indices_from(factor)] = diagonal / omega
    return SORPreconditioner(SparseTriangular(sp.csr_matrix(factor), lower=lower), omega)


def build_ssor(matrix: np.ndarray, omega: float) -> SSORPreconditioner:
    matrix = _square(matrix)
    _check_omega(omega)
    diagonal = _nonzero_diagonal(np.diag(matrix).copy(), "SSOR")
    lower = np.tril(matrix, k=-1)
    upper = np.triu(matrix, k=1)
    lower[np.diag_indices_from(lower)] = diagonal / omega
    upper[np.diag_indices_from(upper)] = diagonal / omega
    return SSORPreconditioner(
        lower=SparseTriangular(sp.csr_matrix(lower), lower=True),
        upper=SparseTriangular(sp.csr_matrix(upper), lower=False),
        diagonal=diagonal,
        omega=omega,
    )


def build_ilut(matrix: np.ndarray, threshold: float) -> ILUTPreconditioner:
    """
    Row-wise (IKJ) Gaussian elimination without pivoting. Once row i is eliminated,
    off-diagonal entries are zeroed when

        |U_ij| < threshold * ||A_{*j}||_2
        |L_ij| < threshold * ||A_{*j}||_2 / |U_jj|

    Diagonal entries are always kept.
    """
    matrix = _square(matrix)
    if threshold < 0:
        raise ConfigurationError(f"ILUT threshold must be non-negative, got {threshold}")
    n = matrix.shape[0]
    col_norms = np.linalg.norm(matrix, axis=0)
    lower = np.zeros((n, n))
    upper = np.zeros((n, n))
    for i in range(n):
        w = matrix[i].copy()
        for k in range(i):
            if w[k] == 0.0:
                continue
            w[k] /= upper[k, k]
            w[k + 1:] -= w[k] * upper[k, k + 1:]
        if w[i] == 0.0:
            raise FactorizationError(i, f"ILUT: zero pivot in row {i}")

        l_row, u_row = w[:i], w[i + 1:]
        l_row[np.abs(l_row) < threshold * col_norms[:i] / np.abs(np.diag(upper)[:i])] = 0.0
        u_row[np.abs(u_row) < threshold * col_norms[i + 1:]] = 0.0
        lower[i, :i] = l_row
        upper[i, i:] = w[i:]

    factor_l = SparseTriangular(sp.csr_matrix(lower), lower=True, unit_diagonal=True)
    factor_u = SparseTriangular(sp.csr_matrix(upper), lower=False)
    logger.debug("ILUT(%g): nnz(L)=%d nnz(U)=%d of %d", threshold, factor_l.nnz, factor_u.nnz, n * n)
    return ILUTPreconditioner(factor_l, factor_u, threshold)


def apply_preconditioner(preconditioner: Preconditioner, v: np.ndarray) -> np.ndarray:
    return preconditioner.apply(v)
