"""Configuration file management for mmwave-planner."""

import os
import yaml
import logging
from pathlib import Path
from typing import Optional, Dict, Any

from pydantic import ValidationError

from app.errors import ConfigError
from models import InstanceDefaults, SolverConfig

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "MMWAVE_PLANNER_CONFIG"
CONFIG_FILE_PATH = os.getenv(CONFIG_ENV_VAR, "/usr/local/etc/mmwave-planner/config.yml")


def config_path(path: Optional[str] = None) -> str:
    """Resolve the configuration file path.

    An explicit path wins, then the environment variable, then the default.
    """
    if path:
        return path
    return os.getenv(CONFIG_ENV_VAR, CONFIG_FILE_PATH)


def ensure_config_directory(path: Optional[str] = None):
    """Ensure the configuration directory exists."""
    config_dir = os.path.dirname(config_path(path))
    if config_dir:
        Path(config_dir).mkdir(parents=True, exist_ok=True)


def read_config(path: Optional[str] = None) -> Dict[str, Any]:
    """Read the configuration file.

    Returns:
        Dictionary containing the configuration. Returns empty dict if file doesn't exist.
    """
    target = config_path(path)
    try:
        if os.path.exists(target):
            with open(target, 'r') as f:
                config = yaml.safe_load(f)
                return config if config else {}
        return {}
    except Exception as e:
        logger.error(f"Error reading config file {target}: {e}", exc_info=True)
        return {}


def write_config(config: Dict[str, Any], path: Optional[str] = None) -> bool:
    """Write the configuration file.

    Args:
        config: Dictionary containing the configuration to write.
        path: Target file, defaults to the resolved configuration path.

    Returns:
        True if successful, False otherwise.
    """
    target = config_path(path)
    try:
        ensure_config_directory(target)
        with open(target, 'w') as f:
            yaml.safe_dump(config, f, default_flow_style=False, sort_keys=False)
        return True
    except Exception as e:
        logger.error(f"Error writing config file {target}: {e}", exc_info=True)
        return False


def _describe(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(part) for part in item.get("loc", ()))
        parts.append(f"{location}: {item.get('msg')}")
    return "; ".join(parts)


def get_solver_config(
    path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None
) -> SolverConfig:
    """Build the solver configuration from the `solver:` section plus overrides.

    Raises:
        ConfigError: if a value violates a SolverConfig constraint.
    """
    section = dict(read_config(path).get('solver') or {})
    for key, value in (overrides or {}).items():
        if value is not None:
            section[key] = value
    try:
        return SolverConfig.model_validate(section)
    except ValidationError as e:
        raise ConfigError(f"Invalid solver configuration: {_describe(e)}") from e


def get_instance_defaults(path: Optional[str] = None) -> InstanceDefaults:
    """Build generation defaults from the `instance:` section."""
    section = read_config(path).get('instance') or {}
    try:
        return InstanceDefaults.model_validate(section)
    except ValidationError as e:
        raise ConfigError(f"Invalid instance defaults: {_describe(e)}") from e
