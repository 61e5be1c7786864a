"""
Process-level settings and logging setup.
"""
from typing import Optional
import logging
import os
import sys

from dotenv import load_dotenv
from pydantic import BaseModel, Field, validator

# Load environment variables
load_dotenv()

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class Settings(BaseModel):
    log_level: str = "INFO"
    workers: int = Field(1, ge=1)
    output_dir: str = "results"
    snapshots: int = Field(1000, ge=1)

    @validator("log_level")
    def validate_log_level(cls, v):
        level = v.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level '{v}'")
        return level


def get_settings() -> Settings:
    """Read V2X_* variables from the environment (and a .env file, if present)."""
    return Settings(
        log_level=os.getenv("V2X_LOG_LEVEL", "INFO"),
        workers=int(os.getenv("V2X_WORKERS", "1")),
        output_dir=os.getenv("V2X_OUTPUT_DIR", "results"),
        snapshots=int(os.getenv("V2X_SNAPSHOTS", "1000")),
    )


def setup_logging(level: Optional[str] = None) -> None:
    """Configure the root logger once, writing to stderr."""
    level = level or get_settings().log_level
    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)],
    )
