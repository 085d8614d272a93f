"""
Configuration settings for the tben encoding toolkit.
"""
from pathlib import Path
from typing import Optional, Tuple
from functools import lru_cache
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv

# Load environment variables from .env file
env_path = Path(__file__).resolve().parent.parent.parent / ".env"
load_dotenv(dotenv_path=env_path)


def parse_int_list(value: str) -> Tuple[int, ...]:
    """Parse a comma-separated list of integers such as "1,5"."""
    return tuple(int(item.strip()) for item in value.split(",") if item.strip())


class Settings(BaseSettings):
    """Settings for the tben toolkit. Every field can be overridden with a TBEN_ variable."""

    model_config = SettingsConfigDict(
        env_prefix="TBEN_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # Logging
    LOG_LEVEL: str = Field("INFO", description="Root log level")
    LOG_FILE: Optional[str] = Field(None, description="Optional log file path")
    DEBUG: bool = Field(False, description="Debug mode")

    # Projector defaults
    DEFAULT_PROJ_DIM: int = Field(4096, gt=0, description="Output dimension d of RM projectors")
    DEFAULT_PROJ_SEED: int = Field(0, ge=0, description="Seed of the first projector")
    DEFAULT_NORM: str = Field("ssqrt", description="Per-descriptor normalization name")
    PROJECTION_CHUNK_ROWS: int = Field(2048, gt=0, description="Descriptors projected per matmul")

    # Batch processing
    ENCODE_WORKERS: int = Field(4, gt=0, description="Threads used by the encode command")

    # Benchmarking
    BENCH_WARMUP: int = Field(2, ge=0, description="Warm-up iterations excluded from timing")

    # Datasets and evaluation
    SPLIT_RATIOS: str = Field("0.7,0.1,0.2", description="train,val,test ratios for synthetic data")
    DEFAULT_KS: str = Field("1,5", description="Default Hit@k cut-offs")

    @field_validator("SPLIT_RATIOS")
    @classmethod
    def validate_split_ratios(cls, v: str) -> str:
        """Ensure the split ratios are three non-negative numbers summing to one."""
        parts = [float(p) for p in v.split(",")]
        if len(parts) != 3 or any(p < 0 for p in parts) or abs(sum(parts) - 1.0) > 1e-9:
            raise ValueError(f"SPLIT_RATIOS must be three non-negative ratios summing to 1, got {v!r}")
        return v

    @field_validator("DEFAULT_KS")
    @classmethod
    def validate_ks(cls, v: str) -> str:
        """Ensure the default cut-offs are positive integers."""
        ks = parse_int_list(v)
        if not ks or any(k < 1 for k in ks):
            raise ValueError(f"DEFAULT_KS must list positive integers, got {v!r}")
        return v

    @property
    def split_ratios(self) -> Tuple[float, float, float]:
        """Split ratios as a (train, val, test) triple."""
        train, val, test = (float(p) for p in self.SPLIT_RATIOS.split(","))
        return train, val, test

    @property
    def default_ks(self) -> Tuple[int, ...]:
        """Default Hit@k cut-offs."""
        return parse_int_list(self.DEFAULT_KS)


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
