"""
Experiment configuration for the benchmark harness
"""
from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from app.core.config import settings
from app.schemas.model import FormalSolverKind, ModelParams
from app.schemas.solver import Method, PreconditionerKind, PreconditionerSpec, SolverConfig, SORVariant


class AssemblyMode(str, Enum):
    ASSEMBLED = "assembled"
    MATRIX_FREE = "matrix-free"


class ExportTarget(str, Enum):
    A = "A"
    PINV_A = "PinvA"
    ILUT = "ilut"


class ExperimentConfig(BaseModel):
    """One experiment file: a sweep over sizes, methods and preconditioners"""
    n_s: List[int] = Field([80], description="Depth node counts")
    n_mu: List[int] = Field([20], description="Angular node counts")
    n_nu: Optional[List[int]] = Field(None, description="Frequency node counts; paired with n_mu when omitted")
    formal_solver: FormalSolverKind = FormalSolverKind.DELO_LINEAR
    methods: List[Method] = Field([Method.GMRES], min_length=1)
    preconditioners: List[PreconditionerKind] = Field([PreconditionerKind.NONE], min_length=1)
    omega: Optional[float] = None
    tolerance: float = Field(settings.TOLERANCE, gt=0.0)
    max_iterations: int = Field(settings.MAX_ITERATIONS, ge=1)
    restart: Optional[int] = Field(None, ge=1)
    ilut_threshold: float = Field(settings.ILUT_THRESHOLD, ge=0.0)
    sor_variant: SORVariant = SORVariant.UPPER
    assembly: AssemblyMode = AssemblyMode.ASSEMBLED
    point_source_assembly: bool = Field(False, description="Assemble columns with the point-source fast path")
    output_dir: str = settings.OUTPUT_DIR
    workers: int = Field(settings.MAX_WORKERS, ge=1)
    seed: Optional[int] = Field(None, description="Reserved; the pipeline is deterministic")

    epsilon: float = settings.EPSILON
    damping_a: float = Field(settings.DAMPING, ge=0.0, description="Voigt damping constant")
    tau_min: float = settings.TAU_MIN
    tau_max: float = settings.TAU_MAX
    nu_min: float = settings.NU_MIN
    nu_max: float = settings.NU_MAX

    @field_validator("n_s")
    @classmethod
    def _check_n_s(cls, value: List[int]) -> List[int]:
        if not value or any(n < 2 for n in value):
            raise ValueError("every n_s must be >= 2")
        return value

    @field_validator("n_mu")
    @classmethod
    def _check_n_mu(cls, value: List[int]) -> List[int]:
        if not value or any(n < 2 or n % 2 for n in value):
            raise ValueError("every n_mu must be an even count >= 2 (no mu = 0 node)")
        return value

    @field_validator("n_nu")
    @classmethod
    def _check_n_nu(cls, value: Optional[List[int]]) -> Optional[List[int]]:
        if value is not None and (not value or any(n < 2 for n in value)):
            raise ValueError("every n_nu must be >= 2")
        return value

    @model_validator(mode="after")
    def _check_pairing(self) -> "ExperimentConfig":
        n_nu = self.n_nu or self.n_mu
        if len(n_nu) != len(self.n_mu) and 1 not in (len(n_nu), len(self.n_mu)):
            raise ValueError("n_mu and n_nu must have equal lengths or one of them a single value")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must satisfy 0 < epsilon <= 1")
        if not 0.0 < self.tau_min < self.tau_max:
            raise ValueError("tau bounds must satisfy 0 < tau_min < tau_max")
        if not self.nu_min < self.nu_max:
            raise ValueError("nu_min must be below nu_max")
        if self.omega is not None and not 0.0 < self.omega < 2.0:
            raise ValueError("omega must satisfy 0 < omega < 2")
        return self

    def angular_spectral_pairs(self) -> List[Tuple[int, int]]:
        n_nu = self.n_nu or self.n_mu
        count = max(len(self.n_mu), len(n_nu))
        mus = self.n_mu * count if len(self.n_mu) == 1 else self.n_mu
        nus = n_nu * count if len(n_nu) == 1 else n_nu
        return list(zip(mus, nus))

    def sizes(self) -> List[Tuple[int, int, int]]:
        """(N_s, N_mu, N_nu) cells in sweep order"""
        return [(n_s, n_mu, n_nu) for n_s in self.n_s for n_mu, n_nu in self.angular_spectral_pairs()]

    def model_params(self) -> ModelParams:
        return ModelParams(epsilon=self.epsilon, damping_a=self.damping_a)

    def solver_config(self, method: Method) -> SolverConfig:
        return SolverConfig(
            method=method,
            tolerance=self.tolerance,
            max_iterations=self.max_iterations,
            restart=self.restart,
            omega=self.omega,
        )

    def preconditioner_spec(self, kind: PreconditionerKind) -> PreconditionerSpec:
        return PreconditionerSpec(kind=kind, threshold=self.ilut_threshold, sor_variant=self.sor_variant)
