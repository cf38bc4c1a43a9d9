"""Configuration management using Pydantic Settings.

Process-wide knobs come from the environment (prefix GSDEFEND_) or a .env file.
Experiment configs are pydantic models in core.models; text config files are parsed here.
NO try-catch blocks - let Pydantic raise ValidationError on bad values.
"""

from pathlib import Path
from typing import TypeVar

import psutil
from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from gsdefend.core.errors import ConfigurationError

ModelT = TypeVar("ModelT", bound=BaseModel)


class GSDefendConfig(BaseSettings):
    """Global configuration - loads from environment variables or .env file."""

    # Parallelism
    workers: int | None = Field(default=None, ge=1, description="Worker threads; None means physical cores")

    # Logging
    log_level: str = Field(default="INFO", description="Root log level for the CLI")

    # Paths
    experiment_root: str = Field(default="experiments", description="Default parent for experiment directories")
    dump_dir: str | None = Field(default=None, description="Where divergence dumps go (default: run directory)")

    model_config = SettingsConfigDict(
        env_prefix="GSDEFEND_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )

    def resolved_workers(self) -> int:
        """Worker count with the physical-core default applied."""
        if self.workers is not None:
            return self.workers
        return psutil.cpu_count(logical=False) or 1


# Singleton instance
config = GSDefendConfig()


def parse_key_value_lines(text: str) -> dict:
    """
    Parse ``key = value`` lines into a (possibly nested) dict of strings.

    Dotted keys (``freq_filter.t_ref``) become nested dicts. ``#`` starts a comment.

    Raises:
        ConfigurationError: On a line without ``=`` or a key given twice
    """
    parsed: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw!r}")

        key, value = (part.strip() for part in line.split("=", 1))
        *parents, leaf = key.split(".")
        node = parsed
        for parent in parents:
            node = node.setdefault(parent, {})
            if not isinstance(node, dict):
                raise ConfigurationError(f"line {lineno}: {key!r} nests under a scalar")
        if leaf in node:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        node[leaf] = value

    return parsed


def load_config_file(path: Path, model_cls: type[ModelT], **overrides) -> ModelT:
    """
    Load a key = value text file into a pydantic model.

    Unknown keys are rejected by the model (extra="forbid"). Keyword overrides win over file values.

    Raises:
        FileNotFoundError: If the file does not exist
        ConfigurationError: On malformed lines
        ValidationError: On unknown keys or out-of-range values
    """
    values = parse_key_value_lines(Path(path).read_text())
    values.update({k: v for k, v in overrides.items() if v is not None})
    return model_cls.model_validate(values)
