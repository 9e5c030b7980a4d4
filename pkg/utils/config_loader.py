"""
Configuration Loading

Flat `key = value` files with `#` comments, validated into SimConfig.
"""

import hashlib
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from pydantic import ValidationError

from core.exceptions import ConfigError
from models.simulation_models import SimConfig

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = "default"


def _field_keys() -> Dict[str, str]:
    """Accepted file keys mapped to SimConfig field names"""
    keys = {}
    for name, info in SimConfig.model_fields.items():
        keys[info.alias or name] = name
        keys[name] = name
    return keys


def _validate(values: Mapping[str, Any]) -> SimConfig:
    try:
        return SimConfig.model_validate(dict(values))
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"invalid configuration: {problems}") from e


def parse_config_text(text: str, source: str = "<text>") -> Dict[str, str]:
    """Raw key/value pairs of a config file, keyed by SimConfig field name"""
    keys = _field_keys()
    values: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{number}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in keys:
            raise ConfigError(f"{source}:{number}: unknown key {key!r}")
        values[keys[key]] = value
    return values


def parse_config(text: str, source: str = "<text>") -> SimConfig:
    return _validate(parse_config_text(text, source))


def load_config(path: Union[str, Path, None]) -> SimConfig:
    """SimConfig from a file, or the built-in defaults for None / 'default'"""
    if path is None or str(path) == DEFAULT_CONFIG:
        return SimConfig()
    config_file = Path(path)
    if not config_file.is_file():
        raise ConfigError(f"config file not found: {config_file}")
    try:
        text = config_file.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {config_file}: {e}") from e
    logger.info(f"Loaded configuration from {config_file}")
    return parse_config(text, str(config_file))


def _format(value: Any) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(config: SimConfig) -> str:
    lines = ["# dnls-scattering run configuration"]
    for name, info in SimConfig.model_fields.items():
        lines.append(f"{info.alias or name} = {_format(getattr(config, name))}")
    return "\n".join(lines) + "\n"


def apply_overrides(config: SimConfig, overrides: Mapping[str, Optional[Any]]) -> SimConfig:
    """Return config with every non-None override applied and revalidated"""
    merged = config.model_dump()
    merged.update({key: value for key, value in overrides.items() if value is not None})
    return _validate(merged)


def config_hash(config: SimConfig) -> str:
    return hashlib.sha256(serialize_config(config).encode("utf-8")).hexdigest()
