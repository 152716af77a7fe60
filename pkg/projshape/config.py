from pathlib import Path
from typing import Literal
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Resampling
    seed: int = Field(20240601, ge=0, description="Default seed for bootstrap and simulation")
    bootstrap_resamples: int = Field(1000, ge=1, description="Default number of bootstrap resamples")
    alpha: float = Field(0.05, gt=0.0, lt=1.0, description="Default significance level")
    workers: int = Field(1, ge=1, description="Threads used for resampling loops")
    max_redraws: int = Field(20, ge=1, description="Attempts per resample before giving up")

    # Logging
    log_level: str = Field("WARNING", description="Root log level")
    log_format: Literal["json", "console"] = Field("json", description="structlog renderer")

    # Output
    output_dir: Path = Field(Path("projshape-out"), description="Default artifact directory")

    model_config = SettingsConfigDict(
        env_prefix="PROJSHAPE_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


settings = Settings()
