from typing import Literal

from pydantic import model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from typing_extensions import Self


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        # Use top level .env file (one level above ./backend/)
        env_file="../.env",
        env_ignore_empty=True,
        extra="ignore",
    )
    PROJECT_NAME: str = "gaussian-measurement-capacity"
    LOG_LEVEL: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"

    # Symmetry check, relative to the spectral norm of the matrix
    SYMMETRY_TOL: float = 1e-10
    # Validity / purity, relative to the largest symplectic eigenvalue
    VALIDITY_TOL: float = 1e-9
    # alpha - (1/2) Delta J_beta >= -THRESHOLD_TOL * ||alpha||
    THRESHOLD_TOL: float = 1e-9
    # Agreement of the two algebraic capacity forms
    FORM_AGREEMENT_TOL: float = 1e-10
    # Energy within this margin of e_min is the point-mass case
    FEASIBILITY_MARGIN: float = 1e-12
    MAX_ENERGY: float = 1e6

    BARRIER_GRADIENT_TOL: float = 1e-10
    BARRIER_VIOLATION_TOL: float = 1e-12
    BARRIER_MAX_ITER: int = 10_000
    BARRIER_MU: float = 10.0

    MI_SPLITS: int = 10
    BIN_BOX_SIGMAS: float = 5.0
    DEFAULT_SAMPLES: int = 100_000

    @model_validator(mode="after")
    def _enforce_positive_limits(self) -> Self:
        for name in (
            "SYMMETRY_TOL",
            "VALIDITY_TOL",
            "THRESHOLD_TOL",
            "FORM_AGREEMENT_TOL",
            "FEASIBILITY_MARGIN",
            "MAX_ENERGY",
            "BARRIER_GRADIENT_TOL",
            "BARRIER_VIOLATION_TOL",
            "BIN_BOX_SIGMAS",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.BARRIER_MU <= 1:
            raise ValueError("BARRIER_MU must be greater than 1")
        if self.BARRIER_MAX_ITER < 1 or self.DEFAULT_SAMPLES < 1:
            raise ValueError("iteration and sample counts must be positive")
        if self.MI_SPLITS < 2:
            raise ValueError("MI_SPLITS must be at least 2")
        return self


settings = Settings()
