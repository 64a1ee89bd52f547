"""
Physical model parameters and formal-solver selection
"""
from enum import Enum

from pydantic import BaseModel, Field, field_validator

from app.core.config import settings


class FormalSolverKind(str, Enum):
    """Numerical scheme integrating the transfer equation along a ray"""
    IMPLICIT_EULER = "implicit_euler"
    DELO_LINEAR = "delo_linear"


class ModelParams(BaseModel):
    """Two-level atom, CRD, isothermal slab"""
    epsilon: float = Field(settings.EPSILON, description="Thermalization parameter")
    damping_a: float = Field(settings.DAMPING, ge=0.0, description="Voigt damping constant")
    planck_W: float = Field(1.0, description="Planck function in the Wien limit")
    depol_delta_u: float = Field(0.0, description="Depolarizing collision rate of the upper level")
    w0: float = Field(1.0, description="Polarizability coefficient K=0")
    w2: float = Field(1.0, description="Polarizability coefficient K=2")
    gamma: float = Field(0.0, description="Reference angle of the polarization tensor")
    incoming_intensity: float = Field(1.0, ge=0.0, description="Unpolarized intensity entering at the bottom")

    @field_validator("epsilon")
    @classmethod
    def _check_epsilon(cls, value: float) -> float:
        if not 0.0 < value <= 1.0:
            raise ValueError("epsilon must satisfy 0 < epsilon <= 1")
        return value

    @property
    def xi(self) -> float:
        return 1.0 - self.epsilon

    class Config:
        frozen = True
        json_schema_extra = {
            "example": {"epsilon": 1e-4, "damping_a": 1e-3}
        }
