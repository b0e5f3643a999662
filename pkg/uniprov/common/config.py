"""
Runtime configuration for uniprov

Settings come from the environment, optionally seeded from a ``.env`` file.
"""

import os
from pathlib import Path

from dotenv import load_dotenv
from pydantic import BaseModel, Field

ENV_PROJECT = "UNIPROV_PROJECT"
ENV_DEBUG = "UNIPROV_DEBUG"
ENV_LOCK_TIMEOUT = "UNIPROV_LOCK_TIMEOUT"
ENV_VERSIONED = "UNIPROV_VERSIONED"


class Settings(BaseModel):
    """Resolved runtime settings."""

    project: Path = Field(default=Path("."), description="Default project directory.")
    debug: bool = Field(default=False, description="Enable debug logging.")
    lock_timeout: float = Field(
        default=5.0, ge=0, description="Seconds to wait for the project lock."
    )
    versioned: bool = Field(
        default=False, description="Render every provenance ID with its timestamp."
    )


def _env_flag(name: str) -> bool:
    return os.environ.get(name, "").lower() == "true"


def load_settings() -> Settings:
    """Load settings from the environment (and ``.env`` if present).

    Returns:
        Settings: Resolved settings
    """
    load_dotenv()

    return Settings(
        project=Path(os.environ.get(ENV_PROJECT) or "."),
        debug=_env_flag(ENV_DEBUG),
        lock_timeout=float(os.environ.get(ENV_LOCK_TIMEOUT) or 5.0),
        versioned=_env_flag(ENV_VERSIONED),
    )
