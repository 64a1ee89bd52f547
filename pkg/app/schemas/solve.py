"""
Schemas for the solve endpoint
"""
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

from app.core.config import settings
from app.schemas.experiment import AssemblyMode
from app.schemas.model import FormalSolverKind
from app.schemas.solver import Method, PreconditionerKind, SolveStatus, SORVariant


class SolveRequest(BaseModel):
    """One benchmark solve"""
    n_s: int = Field(20, ge=2, le=500, description="Depth nodes")
    n_mu: int = Field(4, ge=2, le=80, description="Gauss-Legendre nodes, even")
    n_nu: int = Field(4, ge=2, le=80, description="Frequency nodes")
    formal_solver: FormalSolverKind = FormalSolverKind.DELO_LINEAR
    method: Method = Method.GMRES
    preconditioner: PreconditionerKind = PreconditionerKind.NONE
    sor_variant: SORVariant = SORVariant.UPPER
    omega: Optional[float] = None
    tolerance: float = Field(settings.TOLERANCE, gt=0.0)
    max_iterations: int = Field(settings.MAX_ITERATIONS, ge=1)
    restart: Optional[int] = Field(None, ge=1)
    ilut_threshold: float = Field(settings.ILUT_THRESHOLD, ge=0.0)
    assembly: AssemblyMode = AssemblyMode.ASSEMBLED
    epsilon: float = Field(settings.EPSILON, description="Thermalization parameter")
    include_solution: bool = Field(False, description="Return sigma and the residual history")

    @field_validator("n_mu")
    @classmethod
    def _even_mu(cls, value: int) -> int:
        if value % 2:
            raise ValueError("n_mu must be even (no mu = 0 node)")
        return value

    class Config:
        json_schema_extra = {
            "example": {
                "n_s": 40,
                "n_mu": 20,
                "n_nu": 20,
                "method": "gmres",
                "preconditioner": "ilut",
            }
        }


class SolveResponse(BaseModel):
    """Outcome of the solve"""
    n_s: int
    n_mu: int
    n_nu: int
    method: Method
    preconditioner: PreconditionerKind
    status: SolveStatus
    converged: bool
    iterations: int
    final_residual: Optional[float] = None
    matvec_count: int
    residual_check_count: int
    wall_time: float
    timings: Dict[str, float] = Field(default_factory=dict)
    metadata: Dict[str, Any] = Field(default_factory=dict)
    solution: Optional[List[float]] = None
    residual_history: Optional[List[float]] = None
    message: Optional[str] = None

    class Config:
        json_schema_extra = {
            "example": {
                "n_s": 40,
                "n_mu": 20,
                "n_nu": 20,
                "method": "gmres",
                "preconditioner": "ilut",
                "status": "converged",
                "converged": True,
                "iterations": 7,
                "final_residual": 4.1e-7,
                "matvec_count": 7,
                "residual_check_count": 8,
                "wall_time": 0.05,
            }
        }
