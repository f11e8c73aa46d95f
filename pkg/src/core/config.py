"""Configuration module for the application."""

from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings
from pydantic_settings import SettingsConfigDict


class Settings(BaseSettings):
    """Ambient settings loaded from the environment.

    Only logging is configurable here. Workload and structure parameters come
    from command-line flags so that runs stay reproducible.
    """

    model_config = SettingsConfigDict(
        env_prefix="CPLDS_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(
        default="WARNING",
        description="Minimum level of emitted log events",
    )
    log_json: bool = Field(
        default=True,
        description="Render log events as JSON lines instead of console text",
    )
