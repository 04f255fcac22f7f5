"""Environment-driven settings.

Values come from the process environment, which ``load_settings`` first
populates from a ``.env`` file (see ``.env.example``).  Command-line flags and
problem-definition tables override these defaults downstream.
"""

import os
from dataclasses import dataclass, replace
from pathlib import Path

from dotenv import load_dotenv

from spray_geometry.errors import ConfigError

DEFAULT_TOL_ALGEBRAIC = 1e-12
DEFAULT_TOL_DERIVED = 1e-9
DEFAULT_SINGULAR_DET = 1e-10
DEFAULT_MAX_SPEED = 1e6


@dataclass(frozen=True)
class Tolerances:
    """Pass/fail thresholds for identity-level and derived checks."""

    algebraic: float = DEFAULT_TOL_ALGEBRAIC
    derived: float = DEFAULT_TOL_DERIVED

    def __post_init__(self):
        for name in ("algebraic", "derived"):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigError(f"tolerance '{name}' must be positive, got {value!r}")

    def override(
        self, algebraic: float | None = None, derived: float | None = None
    ) -> "Tolerances":
        changes = {}
        if algebraic is not None:
            changes["algebraic"] = algebraic
        if derived is not None:
            changes["derived"] = derived
        return replace(self, **changes)


@dataclass(frozen=True)
class Settings:
    tolerances: Tolerances = Tolerances()
    singular_det: float = DEFAULT_SINGULAR_DET
    max_speed: float = DEFAULT_MAX_SPEED
    workers: int = 4
    log_dir: Path = Path("logs")


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = float(raw)
    except ValueError as e:
        raise ConfigError(f"{name} must be a number, got {raw!r}") from e
    if not value > 0:
        raise ConfigError(f"{name} must be positive, got {raw!r}")
    return value


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from e
    if value < 1:
        raise ConfigError(f"{name} must be at least 1, got {raw!r}")
    return value


def load_settings(dotenv: bool = True) -> Settings:
    """Read settings from the environment (after loading ``.env`` if asked)."""
    if dotenv:
        load_dotenv()
    return Settings(
        tolerances=Tolerances(
            algebraic=_env_float("SPRAY_TOL_ALGEBRAIC", DEFAULT_TOL_ALGEBRAIC),
            derived=_env_float("SPRAY_TOL_DERIVED", DEFAULT_TOL_DERIVED),
        ),
        singular_det=_env_float("SPRAY_SINGULAR_DET", DEFAULT_SINGULAR_DET),
        max_speed=_env_float("SPRAY_MAX_SPEED", DEFAULT_MAX_SPEED),
        workers=_env_int("SPRAY_WORKERS", 4),
        log_dir=Path(os.getenv("SPRAY_LOG_DIR", "logs")),
    )
