"""
Runtime settings resolution.

Resolution order for every SSICERT_* key:
  1. .env file at the project root   (loaded via python-dotenv)
  2. Environment variable             (os.environ)
  3. Built-in default

Usage:
    from ssicert.utils.config import load_settings

    settings = load_settings()
    settings.solver_chain        # ('CLARABEL', 'SCS')
    settings.quadrature_points   # 4096
"""

import functools
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple, TypeVar

from dotenv import dotenv_values

from ssicert.core.errors import ConfigError

T = TypeVar("T")

_PREFIX = "SSICERT_"

MIN_QUADRATURE_POINTS = 1024


@dataclass(frozen=True)
class Settings:
    """Resolved configuration for solvers, quadrature and workers."""

    sdp_solver: str = "CLARABEL"
    sdp_fallbacks: Tuple[str, ...] = ("SCS",)
    quadrature_points: int = 4096
    hinf_rel_tol: float = 1e-4
    workers: int = 1
    log_level: str = "WARNING"
    output_dir: Optional[Path] = None

    @property
    def solver_chain(self) -> Tuple[str, ...]:
        """Preferred solver first, then fallbacks, without duplicates."""
        chain = []
        for name in (self.sdp_solver,) + tuple(self.sdp_fallbacks):
            if name and name not in chain:
                chain.append(name)
        return tuple(chain)


def _find_dotenv() -> Optional[Path]:
    """Walk up from the package root to find the nearest .env file."""
    candidate = Path(__file__).resolve().parent
    while candidate != candidate.parent:
        env_file = candidate / ".env"
        if env_file.is_file():
            return env_file
        # Stop at the project root (where pyproject.toml lives)
        if (candidate / "pyproject.toml").is_file():
            break
        candidate = candidate.parent
    return None


def _raw_values() -> Tuple[Dict[str, str], Optional[Path]]:
    """Collect SSICERT_* values: .env first, then os.environ for keys still unset."""
    values: Dict[str, str] = {}
    env_file = _find_dotenv()
    if env_file is not None:
        for key, value in dotenv_values(env_file).items():
            if key.startswith(_PREFIX) and value is not None and value.strip():
                values[key] = value.strip()
    for key, value in os.environ.items():
        if key.startswith(_PREFIX) and key not in values and value.strip():
            values[key] = value.strip()
    return values, env_file


def _convert(values: Dict[str, str], key: str, cast: Callable[[str], T], default: T,
             env_file: Optional[Path], check: Callable[[T], bool] = lambda v: True,
             expected: str = "") -> T:
    raw = values.get(_PREFIX + key)
    if raw is None:
        return default
    try:
        value = cast(raw)
    except (TypeError, ValueError):
        value = None
    if value is None or not check(value):
        env_path = env_file or Path("<project-root>/.env")
        raise ConfigError(
            f"{_PREFIX}{key}={raw!r} is not valid.\n\n"
            "Tried:\n"
            f"  1. {env_path}\n"
            f"  2. os.environ['{_PREFIX}{key}']\n\n"
            f"Expected: {expected or cast.__name__}.\n"
            f"Fix: edit {env_path} or unset the variable to use the default ({default!r})."
        )
    return value


def _solver_list(raw: str) -> Tuple[str, ...]:
    return tuple(part.strip().upper() for part in raw.split(",") if part.strip())


@functools.lru_cache(maxsize=1)
def load_settings() -> Settings:
    """
    Resolve all settings once per process.

    Call ``load_settings.cache_clear()`` after changing the environment.

    Raises:
        ConfigError: if a key is present but holds an invalid value.
    """
    values, env_file = _raw_values()
    defaults = Settings()
    output_dir = values.get(_PREFIX + "OUTPUT_DIR")
    return Settings(
        sdp_solver=_convert(values, "SDP_SOLVER", str.upper, defaults.sdp_solver, env_file),
        sdp_fallbacks=_convert(values, "SDP_FALLBACK", _solver_list, defaults.sdp_fallbacks,
                               env_file, expected="comma-separated solver names"),
        quadrature_points=_convert(values, "QUADRATURE_POINTS", int, defaults.quadrature_points,
                                   env_file, check=lambda v: v >= MIN_QUADRATURE_POINTS,
                                   expected=f"integer >= {MIN_QUADRATURE_POINTS}"),
        hinf_rel_tol=_convert(values, "HINF_REL_TOL", float, defaults.hinf_rel_tol, env_file,
                              check=lambda v: 0.0 < v < 1.0, expected="float in (0, 1)"),
        workers=_convert(values, "WORKERS", int, defaults.workers, env_file,
                         check=lambda v: v >= 1, expected="integer >= 1"),
        log_level=_convert(values, "LOG_LEVEL", str.upper, defaults.log_level, env_file,
                           check=lambda v: v in ("DEBUG", "INFO", "WARNING", "ERROR"),
                           expected="DEBUG, INFO, WARNING or ERROR"),
        output_dir=Path(output_dir).expanduser() if output_dir else None,
    )
