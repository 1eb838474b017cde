"""
Configuration for cstarkit.

Loads limits and ambient settings from a YAML config file. Module-level
names are refreshed on every load, so imports like
    from . import config
    config.MAX_VERTICES
always see the current values.

Config resolution order:
    1. load_config(path): explicit call, e.g. from the CLI --config flag
    2. CSTARKIT_CONFIG env var
    3. configs/default.yaml (relative to repo root)
    4. Hardcoded fallback defaults

The CSTAR_MAX_VERTICES env var overrides limits.max_vertices after loading.
"""

import copy
import logging
import os
from pathlib import Path
from typing import Optional

import yaml

logger = logging.getLogger(__name__)

# ── Locate repo root (two levels up from this file) ─────────────────────
_PACKAGE_DIR = Path(__file__).resolve().parent
_REPO_ROOT = _PACKAGE_DIR.parent.parent

# ── Hardcoded fallback (used if no YAML found) ──────────────────────────
_FALLBACK_CONFIG = {
    "limits": {
        "max_vertices": 20,
    },
    "ktheory": {
        "max_free_rank": 2,
        "max_orbit_size": 200000,
    },
    "classify": {
        "max_unit_pairs": 1000000,
        "max_isomorphism_vertices": 8,
    },
    "cli": {
        "manifest_workers": 4,
    },
    "traces": {
        "dir": "traces/",
    },
    "logging": {
        "level": "WARNING",
    },
}

MAX_VERTICES_ENV = "CSTAR_MAX_VERTICES"


# ── Internal state ──────────────────────────────────────────────────────
_config: dict = {}
_loaded = False


def _resolve_path(relative: str) -> str:
    """Resolve a path relative to the repo root."""
    return str(_REPO_ROOT / relative)


def load_config(path: Optional[str] = None) -> dict:
    """Load configuration from a YAML file.

    Args:
        path: Path to a YAML config file. If None, tries:
              1. CSTARKIT_CONFIG env var
              2. configs/default.yaml (relative to repo root)
              3. Hardcoded fallback

    Returns:
        The loaded config dict (missing sections filled from the fallback).

    Side effects:
        Updates the module-level constants (MAX_VERTICES, TRACES_DIR, ...).
    """
    global _config, _loaded

    if path is None:
        path = os.environ.get("CSTARKIT_CONFIG")
    if path is None:
        default_path = _REPO_ROOT / "configs" / "default.yaml"
        if default_path.exists():
            path = str(default_path)

    merged = copy.deepcopy(_FALLBACK_CONFIG)
    if path is not None:
        resolved_path = Path(path)
        if not resolved_path.is_absolute():
            resolved_path = _REPO_ROOT / resolved_path
        with open(resolved_path, "r", encoding="utf-8") as f:
            loaded = yaml.safe_load(f) or {}
        for section, values in loaded.items():
            if isinstance(values, dict):
                merged.setdefault(section, {}).update(values)
            else:
                merged[section] = values
        logger.debug("Loaded config from %s", resolved_path)

    _config = merged
    _loaded = True
    _update_module_constants()
    return _config


def get_config() -> dict:
    """Return the current config, loading defaults if not yet loaded."""
    if not _loaded:
        load_config()
    return _config


def _update_module_constants():
    """Populate module-level constants from the loaded config."""
    global MAX_VERTICES, MAX_FREE_RANK, MAX_ORBIT_SIZE, MAX_UNIT_PAIRS, MAX_ISOMORPHISM_VERTICES
    global MANIFEST_WORKERS, TRACES_DIR, LOG_LEVEL

    c = _config

    # Limits
    MAX_VERTICES = int(c["limits"].get("max_vertices", 20))
    env_limit = os.environ.get(MAX_VERTICES_ENV)
    if env_limit:
        try:
            MAX_VERTICES = int(env_limit)
        except ValueError:
            logger.warning("Ignoring non-integer %s=%r", MAX_VERTICES_ENV, env_limit)

    # K-theory
    kt = c.get("ktheory", {})
    MAX_FREE_RANK = int(kt.get("max_free_rank", 2))
    MAX_ORBIT_SIZE = int(kt.get("max_orbit_size", 200000))

    # Classification
    cl = c.get("classify", {})
    MAX_UNIT_PAIRS = int(cl.get("max_unit_pairs", 1000000))
    MAX_ISOMORPHISM_VERTICES = int(cl.get("max_isomorphism_vertices", 8))

    # CLI
    MANIFEST_WORKERS = int(c.get("cli", {}).get("manifest_workers", 4))

    # Traces
    TRACES_DIR = _resolve_path(c.get("traces", {}).get("dir", "traces/"))

    # Logging
    LOG_LEVEL = str(c.get("logging", {}).get("level", "WARNING")).upper()


# ── Auto-load on import ─────────────────────────────────────────────────
load_config()
