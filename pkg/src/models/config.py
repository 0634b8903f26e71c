"""Configuration models using Pydantic Settings."""

from functools import lru_cache
from pathlib import Path
from typing import Literal, Optional

from pydantic import Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Numerical and runtime settings loaded from environment variables (prefix DISTBEAM_)."""

    model_config = SettingsConfigDict(
        env_prefix="DISTBEAM_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    app_name: str = "distbeam"
    app_version: str = "0.1.0"

    # Parallelism (DISTBEAM_THREADS)
    threads: int = Field(default=1, ge=1, le=256)

    # Uniqueness thresholds on |det H| / scale
    singular_threshold: float = Field(default=1e-9, gt=0.0, lt=1.0)
    near_singular_threshold: float = Field(default=1e-4, gt=0.0, lt=1.0)

    # Quadrature
    quad_abs_tol: float = Field(default=1e-11, gt=0.0)
    quad_rel_tol: float = Field(default=1e-12, ge=0.0)
    quad_max_subdivisions: int = Field(default=2000, ge=10, le=1_000_000)
    duhamel_knots: int = Field(default=64, ge=1, le=100_000)

    # Finite-difference solvers
    singular_window_cells: int = Field(default=200, ge=1)

    # Logging
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "INFO"
    log_format: Literal["json", "text"] = "text"
    log_file: Optional[Path] = None

    @model_validator(mode="after")
    def thresholds_ordered(self) -> "Settings":
        """Singular threshold must lie below the near-singular one."""
        if self.singular_threshold >= self.near_singular_threshold:
            raise ValueError("singular_threshold must be smaller than near_singular_threshold")
        return self


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
