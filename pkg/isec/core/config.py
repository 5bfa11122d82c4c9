"""Configuration management using Pydantic Settings.

Settings are read from ``ISEC_``-prefixed environment variables or a ``.env``
file. ``RunConfig`` is the per-invocation configuration the CLI assembles from
its arguments, with ``Settings`` supplying the defaults.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, Literal

from pydantic import BaseModel, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

Subcommand = Literal[
    "validate",
    "check",
    "frontier",
    "cones",
    "relative",
    "relation",
    "algebra",
    "regularity",
    "generate",
    "report",
]

ReportFormat = Literal["json", "text"]


class Settings(BaseSettings):
    """Process-wide settings loaded from the environment or a .env file."""

    model_config = SettingsConfigDict(
        env_prefix="ISEC_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    threads: int = Field(
        default=1,
        ge=1,
        description="Upper bound on worker threads for exhaustive scans",
    )

    tolerance: float = Field(
        default=1e-9,
        gt=0,
        description="Slack used when comparing float distances",
    )

    seed: int = Field(
        default=0,
        description="Default seed for randomized searches and generators",
    )

    log_level: str = Field(
        default="WARNING",
        description="Root log level for the command-line front end",
    )

    report_format: ReportFormat = Field(
        default="json",
        description="Default report format",
    )

    oracle_checks: bool = Field(
        default=False,
        description="Cross-run the brute-force oracles on every check",
    )

    cache_size: int = Field(
        default=1024,
        ge=1,
        description="Most frontiers the HTTP service keeps in memory",
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Accept only level names the logging module knows."""
        name = v.strip().upper()
        if not isinstance(logging.getLevelName(name), int):
            raise ValueError(f"Unknown log level: {v}")
        return name


def get_settings() -> Settings:
    """Return the settings for this process."""
    return Settings()


class RunConfig(BaseModel):
    """One invocation of the command-line front end."""

    model_config = {"frozen": True}

    subcommand: Subcommand
    inputs: Dict[str, Path] = Field(
        default_factory=dict,
        description="Named input documents (instance, section, reference, ...)",
    )
    output: Path | None = Field(
        default=None,
        description="Report destination; stdout when absent",
    )
    tolerance: float = Field(default=1e-9, gt=0)
    seed: int = 0
    threads: int = Field(default=1, ge=1)
    report_format: ReportFormat = "json"
    oracle: bool = False
    options: Dict[str, object] = Field(
        default_factory=dict,
        description="Subcommand-specific options (constants, labels, radii)",
    )
