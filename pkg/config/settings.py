from __future__ import annotations

import logging
import os
from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional

from dotenv import dotenv_values, load_dotenv


# Resolve repo root (one level up from this file's directory)
ROOT_DIR = Path(__file__).resolve().parent.parent
ENV_PATH = ROOT_DIR / ".env"

ENV_PREFIX = "COVEXT_"


@lru_cache(maxsize=1)
def load_env() -> bool:
    """Load environment variables from the project root `.env` file.

    Returns:
        bool: True if a .env file was found and loaded, False otherwise.
    """
    return load_dotenv(dotenv_path=ENV_PATH)


def _env(name: str) -> Optional[str]:
    load_env()
    value = os.getenv(ENV_PREFIX + name)
    if value is None or value.strip() == "":
        return None
    return value.strip()


def get_int(name: str, default: int) -> int:
    """Return the integer setting ``COVEXT_<name>`` or ``default``.

    Raises:
        RuntimeError: If the variable is set but is not an integer.
    """
    raw = _env(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise RuntimeError(
            f"Invalid value for {ENV_PREFIX}{name}: {raw!r}. Please set an integer in your environment or .env file."
        ) from None


def get_float(name: str, default: float) -> float:
    """Return the float setting ``COVEXT_<name>`` or ``default``.

    Raises:
        RuntimeError: If the variable is set but is not a number.
    """
    raw = _env(name)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise RuntimeError(
            f"Invalid value for {ENV_PREFIX}{name}: {raw!r}. Please set a number in your environment or .env file."
        ) from None


def get_str(name: str, default: str) -> str:
    raw = _env(name)
    return default if raw is None else raw


def default_grid_points(dim: int) -> int:
    """Default number of grid points per axis for a ``dim``-dimensional torus."""
    if dim == 1:
        return get_int("GRID_1D", 512)
    if dim == 2:
        return get_int("GRID_2D", 50)
    return get_int("GRID_ND", 24)


def load_config_file(path: Optional[str | Path]) -> Dict[str, str]:
    """Parse a flat ``key=value`` configuration file.

    Keys are normalised to lower case with dashes turned into underscores so
    that they line up with argparse destinations.

    Raises:
        RuntimeError: If the file does not exist.
    """
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise RuntimeError(f"Config file not found: {p}")
    values = dotenv_values(dotenv_path=p)
    return {
        k.strip().lower().replace("-", "_"): v
        for k, v in values.items()
        if v is not None
    }


def configure_logging(level: Optional[str] = None) -> None:
    """Configure root logging once for command-line use."""
    name = (level or get_str("LOG_LEVEL", "INFO")).upper()
    resolved = getattr(logging, name, None)
    if not isinstance(resolved, int):
        raise RuntimeError(f"Unknown log level: {name}")
    logging.basicConfig(level=resolved, format="%(message)s")
    logging.getLogger().setLevel(resolved)
