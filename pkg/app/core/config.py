"""
Application configuration settings
"""
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Toolkit settings"""

    # API Configuration
    API_HOST: str = "0.0.0.0"
    API_PORT: int = 8000
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # Output
    OUTPUT_DIR: str = "results"

    # Atmosphere and line model
    TAU_MIN: float = 1e-5
    TAU_MAX: float = 1e4
    NU_MIN: float = -5.0
    NU_MAX: float = 5.0
    EPSILON: float = 1e-4
    DAMPING: float = 1e-3

    # Solver defaults
    TOLERANCE: float = 1e-6
    MAX_ITERATIONS: int = 10_000
    ILUT_THRESHOLD: float = 1e-2

    # Cache Configuration
    CACHE_TTL: int = 3600  # 1 hour
    CACHE_MAXSIZE: int = 64

    # Sweep cells solved concurrently
    MAX_WORKERS: int = 1

    class Config:
        env_file = ".env"
        case_sensitive = True


# Global settings instance
settings = Settings()
