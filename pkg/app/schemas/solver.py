"""
Solver configuration and solve report schemas
"""
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

from app.core.config import settings


class Method(str, Enum):
    RICHARDSON = "richardson"
    GMRES = "gmres"
    BICGSTAB = "bicgstab"
    CGS = "cgs"
    LU = "lu"


class PreconditionerKind(str, Enum):
    NONE = "none"
    JACOBI = "jacobi"
    SOR = "sor"
    SSOR = "ssor"
    ILUT = "ilut"


class SORVariant(str, Enum):
    UPPER = "upper"
    LOWER = "lower"


class SolveStatus(str, Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    BREAKDOWN = "breakdown"
    LUCKY_BREAKDOWN = "lucky_breakdown"
    DIVERGED = "diverged"


class PreconditionerSpec(BaseModel):
    """What preconditioner to build and with which knobs"""
    kind: PreconditionerKind = PreconditionerKind.NONE
    threshold: float = Field(settings.ILUT_THRESHOLD, ge=0.0, description="ILUT drop tolerance")
    sor_variant: SORVariant = SORVariant.UPPER

    class Config:
        frozen = True


class SolverConfig(BaseModel):
    """Iteration controls shared by all methods"""
    method: Method = Method.GMRES
    tolerance: float = Field(settings.TOLERANCE, gt=0.0)
    max_iterations: int = Field(settings.MAX_ITERATIONS, ge=1)
    restart: Optional[int] = Field(None, ge=1, description="GMRES restart length, none by default")
    omega: Optional[float] = Field(None, description="SOR/SSOR relaxation; resolved per method when unset")

    @field_validator("omega")
    @classmethod
    def _check_omega(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not 0.0 < value < 2.0:
            raise ValueError("omega must satisfy 0 < omega < 2")
        return value

    def resolved_omega(self, kind: PreconditionerKind) -> float:
        """1.5 for (S)SOR-preconditioned Richardson, no damping otherwise"""
        if self.omega is not None:
            return self.omega
        if self.method == Method.RICHARDSON and kind in (PreconditionerKind.SOR, PreconditionerKind.SSOR):
            return 1.5
        return 1.0

    class Config:
        frozen = True


class SolveReport(BaseModel):
    """Outcome of one solve"""
    solution: List[float] = Field(default_factory=list)
    iterations: int = 0
    residual_history: List[float] = Field(default_factory=list, description="Relative residuals, initial first")
    matvec_count: int = Field(0, description="Operator applications made by the method itself")
    residual_check_count: int = Field(0, description="Operator applications spent on true-residual checks")
    preconditioner_apply_count: int = 0
    converged: bool = False
    status: SolveStatus = SolveStatus.MAX_ITERATIONS
    message: Optional[str] = None
    wall_time: float = 0.0
    timings: Dict[str, float] = Field(default_factory=dict)
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1] if self.residual_history else float("nan")
