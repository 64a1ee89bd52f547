"""
Exception hierarchy shared by every layer of the toolkit
"""


class RadiativeSolverError(Exception):
    """Base class for all toolkit errors"""


class ConfigurationError(RadiativeSolverError):
    """Invalid grid bounds, sizes or experiment configuration"""


class UnsupportedModeError(ConfigurationError):
    """Requested operation is not available in the configured assembly mode"""


class ContractViolation(RadiativeSolverError, ValueError):
    """Caller passed arrays of the wrong shape or out-of-domain arguments"""


class SingularMatrixError(RadiativeSolverError):
    """Exactly zero pivot or diagonal entry"""


class FactorizationError(RadiativeSolverError):
    """Incomplete factorization hit a zero pivot"""

    def __init__(self, row: int, message: str = ""):
        self.row = row
        super().__init__(message or f"zero pivot in row {row}")


class DivergenceError(RadiativeSolverError):
    """Iterate became non-finite"""

    def __init__(self, iteration: int, message: str = ""):
        self.iteration = iteration
        super().__init__(message or f"non-finite iterate at iteration {iteration}")
