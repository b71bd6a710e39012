"""
Configuration settings for the Universal Detector Lab
"""
from functools import lru_cache
from typing import Tuple, Union

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings with environment variable support"""

    model_config = SettingsConfigDict(
        env_prefix="UDL_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Application Info
    app_name: str = Field(default="Universal Detector Lab")
    app_version: str = Field(default="1.0.0")
    debug: bool = Field(default=False)

    # Numerical tolerances
    tolerance: float = Field(default=1e-9, gt=0.0)
    rank_rtol: float = Field(default=1e-12, gt=0.0)
    eig_cutoff: float = Field(default=1e-12, gt=0.0)

    # Detector construction
    denominator_guard: float = Field(default=1e-6, gt=0.0)
    ancilla_mixing: float = Field(default=0.1, gt=0.0, lt=1.0)
    ancilla_search_attempts: int = Field(default=16, ge=1)
    su2_grid: Union[Tuple[int, int, int], str] = Field(default=(40, 20, 20))
    universality_samples: int = Field(default=0, ge=0)

    # Sampling
    sample_chunk_size: int = Field(default=8192, ge=1)
    workers: int = Field(default=1, ge=1)
    proposal_batch: int = Field(default=4096, ge=1)
    max_rejection_rounds: int = Field(default=10000, ge=1)

    # Reports
    record_wall_time: bool = Field(default=False)
    output_dir: str = Field(default="./results")

    @field_validator("su2_grid", mode="before")
    @classmethod
    def parse_su2_grid(cls, v):
        if isinstance(v, str):
            return tuple(int(part.strip()) for part in v.split(",") if part.strip())
        return v

    # Logging
    log_level: str = Field(default="INFO")
    log_format: str = Field(default="console")


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()


# Global settings instance
settings = get_settings()
