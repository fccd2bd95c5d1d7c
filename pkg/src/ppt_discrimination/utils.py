import json
import logging
import os
from typing import Any

import numpy as np
from packaging.version import InvalidVersion, Version
from ruamel.yaml import YAML

from ppt_discrimination.constants import ENV_GAP_TOL, GAP_TOL, SCHEMA_VERSION
from ppt_discrimination.types import FilePath

__all__ = [
    "check_schema_version",
    "create_yaml_obj",
    "dump_json",
    "env_gap_tol",
    "load_yaml",
]

logger = logging.getLogger("utils")


def create_yaml_obj() -> YAML:
    # JSON documents are valid YAML 1.2, so one safe loader reads both formats.
    return YAML(typ="safe", pure=True)


def load_yaml(yaml_file: FilePath) -> Any:
    with open(yaml_file, "r", encoding="utf-8") as f:
        return create_yaml_obj().load(f)


def _to_builtin(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def dump_json(data: Any) -> str:
    """Canonical JSON: sorted keys, two-space indentation, shortest round-trip floats"""
    return json.dumps(data, sort_keys=True, indent=2, allow_nan=False, default=_to_builtin) + "\n"


def check_schema_version(value: str | None, supported: str = SCHEMA_VERSION) -> None:
    """Accept a document whose schema_version shares the supported major version

    A missing version is read as the supported one.

    :raises ValueError: if the version is malformed or has another major version.
    """
    if value is None:
        return
    try:
        got = Version(value)
    except InvalidVersion:
        raise ValueError(f"schema_version {value!r} is not a valid version") from None
    if got.major != Version(supported).major:
        raise ValueError(f"schema_version {value} is not supported, expected {supported}")


def env_gap_tol() -> float:
    """Default gap tolerance, overridden by the PPTDISCRIM_TOL environment variable

    :raises ValueError: if the variable is set to something other than a positive number.
    """
    raw = os.environ.get(ENV_GAP_TOL, "").strip()
    if not raw:
        return GAP_TOL
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"{ENV_GAP_TOL}={raw!r} is not a number") from None
    if not value > 0:
        raise ValueError(f"{ENV_GAP_TOL} must be positive, got {raw}")
    logger.debug("Gap tolerance %s taken from %s", value, ENV_GAP_TOL)
    return value
