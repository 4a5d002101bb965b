from pydantic_settings import BaseSettings
from typing import List
from functools import lru_cache


class Settings(BaseSettings):
    THREADS: int = 4
    LOG_LEVEL: str = "INFO"
    OUTPUT_DIR: str = "runs"

    # Integration defaults
    DEFAULT_RTOL: float = 1e-9
    DEFAULT_ATOL: float = 1e-11
    DEFAULT_RK4_STEP: float = 1e-3
    DEFAULT_RECORD_STRIDE: float = 0.01

    # Spectral thresholds
    EIGEN_FLOOR: float = 1e-14
    DEGENERACY_GAP: float = 1e-12

    CSV_DIGITS: int = 17

    # Diagnostic defaults
    DEFAULT_R_OUT: float = 0.1
    DEFAULT_VS_RADIUS: float = 0.1
    DEFAULT_VS_SAMPLES: int = 500

    class Config:
        env_file = ".env"
        env_prefix = "QFLOW_"
        case_sensitive = True


@lru_cache()
def get_settings() -> Settings:
    return Settings()


settings = get_settings()

SUPPORTED_KERNELS = ["euclidean", "vonneumann", "tsallis"]

KERNEL_ALIASES = {
    "l2": "euclidean",
    "frobenius": "euclidean",
    "projection": "euclidean",
    "mmw": "vonneumann",
    "entropic": "vonneumann",
    "von_neumann": "vonneumann",
    "logit": "vonneumann",
}

SUPPORTED_SPACES = ["dual", "primal", "quotient"]

SUPPORTED_INTEGRATORS = ["dopri45", "rk4"]

SUPPORTED_DIAGNOSTICS: List[str] = ["regret", "fenchel", "recurrence", "vsprobe", "bloch"]
