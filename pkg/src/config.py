# config.py
import os
import logging
from dataclasses import dataclass
from dotenv import load_dotenv

logger = logging.getLogger(__name__)
load_dotenv()

_TRUTHY = {"1", "true", "yes", "on"}


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {name}={raw!r}, using {default}")
        return default


@dataclass(frozen=True)
class Settings:
    """Process-wide defaults read from the environment (and a local .env file)."""
    jobs: int
    budget: int
    debug_checks: bool
    log_level: str


def load_settings() -> Settings:
    """
    Read the current environment into a Settings snapshot.

    Returns:
        Settings with CLI-overridable defaults
    """
    return Settings(
        jobs=max(1, _int_env("GERBEKIT_JOBS", 1)),
        budget=max(0, _int_env("GERBEKIT_BUDGET", 200000)),
        debug_checks=os.getenv("GERBEKIT_DEBUG_CHECKS", "0").strip().lower() in _TRUTHY,
        log_level=os.getenv("GERBEKIT_LOG_LEVEL", "INFO").upper(),
    )


def debug_checks_enabled() -> bool:
    """Whether eager self-checks should run after constructions."""
    return os.getenv("GERBEKIT_DEBUG_CHECKS", "0").strip().lower() in _TRUTHY


def cache_size() -> int:
    """Entries kept by each memoized construction, read once at import (GERBEKIT_CACHE_SIZE)."""
    return max(1, _int_env("GERBEKIT_CACHE_SIZE", 1024))
