"""
Reads and writes run configuration documents.

A config is a flat `key: value` document, one field per line, `#` comments
allowed. Keys are exactly the ModelConfig field names; anything else is rejected.
"""

import re
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import yaml

from core_exchange import AlphaKind, AlphaMode
from errors import ConfigError, ContractViolation
from model_config import ModelConfig, ModelVariant, ScheduleUnit

logger = logging.getLogger(__name__)

FIELD_ORDER = (
    "variant", "duration", "seed", "n0", "tau", "schedule_unit", "alpha_mode",
    "split_fraction", "bins", "ensembles", "snapshot_times",
)
REQUIRED_FIELDS = ("variant", "duration", "seed")

_FIXED_ALPHA = re.compile(r"^fixed\s*(?:\(\s*([^)]*?)\s*\))?$")


def parse_alpha_mode(text: str) -> AlphaMode:
    """`fixed`, `fixed(0.3)`, `per_transaction_uniform` or `quenched_per_agent`"""
    value = str(text).strip()
    match = _FIXED_ALPHA.match(value)
    if match:
        if match.group(1) is None or match.group(1) == "":
            return AlphaMode.fixed()
        try:
            return AlphaMode.fixed(float(match.group(1)))
        except ValueError:
            raise ConfigError(f"not a number: {match.group(1)!r}", field="alpha_mode")
        except ContractViolation as e:
            raise ConfigError(str(e), field="alpha_mode")
    if value == AlphaKind.PER_TRANSACTION_UNIFORM.value:
        return AlphaMode.per_transaction_uniform()
    if value == AlphaKind.QUENCHED_PER_AGENT.value:
        return AlphaMode.quenched_per_agent()
    raise ConfigError(
        f"unknown mode {value!r}; expected fixed(<alpha>), per_transaction_uniform or quenched_per_agent",
        field="alpha_mode",
    )


def format_alpha_mode(mode: AlphaMode) -> str:
    if mode.kind is AlphaKind.FIXED:
        return f"fixed({mode.value!r})"
    return mode.kind.value


def _as_int(value: Any, key: str) -> int:
    # YAML reads 1e6 as a string and 1.0e6 as a float
    if isinstance(value, bool):
        raise ConfigError(f"expected an integer, got {value!r}", field=key)
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            return int(text)
        except ValueError:
            pass
        try:
            number = float(text)
        except ValueError:
            number = None
        if number is not None and number.is_integer():
            return int(number)
    raise ConfigError(f"expected an integer, got {value!r}", field=key)


def _as_float(value: Any, key: str) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"expected a number, got {value!r}", field=key)
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"expected a number, got {value!r}", field=key)


def _as_times(value: Any, key: str) -> Tuple[int, ...]:
    if isinstance(value, str):
        items = [part for part in (p.strip() for p in value.split(",")) if part]
    elif isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = [value]
    return tuple(_as_int(item, key) for item in items)


def _as_enum(enum_cls, value: Any, key: str):
    try:
        return enum_cls(str(value).strip())
    except ValueError:
        allowed = ", ".join(member.value for member in enum_cls)
        raise ConfigError(f"unknown value {value!r}; expected one of {allowed}", field=key)


_CONVERTERS = {
    "variant": lambda v, k: _as_enum(ModelVariant, v, k),
    "duration": _as_int,
    "seed": _as_int,
    "n0": _as_int,
    "tau": _as_int,
    "schedule_unit": lambda v, k: _as_enum(ScheduleUnit, v, k),
    "alpha_mode": lambda v, k: parse_alpha_mode(v),
    "split_fraction": _as_float,
    "bins": _as_int,
    "ensembles": _as_int,
    "snapshot_times": _as_times,
}


def _key_lines(text: str) -> Dict[str, int]:
    """1-based line of every top-level key; a repeated key is an error."""
    node = yaml.compose(text, Loader=yaml.SafeLoader)
    if not isinstance(node, yaml.MappingNode):
        return {}
    lines: Dict[str, int] = {}
    for key_node, _ in node.value:
        key = str(key_node.value)
        line = key_node.start_mark.line + 1
        if key in lines:
            raise ConfigError(f"duplicate key, first set on line {lines[key]}", field=key, line=line)
        lines[key] = line
    return lines


def parse_config(text: str) -> ModelConfig:
    try:
        lines = _key_lines(text)
        document = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(e, "problem", None) or str(e)
        raise ConfigError(f"malformed config: {problem}", line=line) from e

    if document is None:
        raise ConfigError("config document is empty")
    if not isinstance(document, dict):
        raise ConfigError("config must be a mapping of `key: value` lines", line=1)

    fields: Dict[str, Any] = {}
    for raw_key, raw_value in document.items():
        key = str(raw_key)
        line = lines.get(key)
        if key not in _CONVERTERS:
            raise ConfigError("unknown key", field=key, line=line)
        if raw_value is None:
            raise ConfigError("missing value", field=key, line=line)
        try:
            fields[key] = _CONVERTERS[key](raw_value, key)
        except ConfigError as e:
            raise ConfigError(e.message, field=e.field or key, line=line) from e

    missing = [key for key in REQUIRED_FIELDS if key not in fields]
    if missing:
        raise ConfigError(f"required key(s) missing: {', '.join(missing)}")

    try:
        config = ModelConfig(**fields)
    except ConfigError as e:
        line = lines.get(e.field) if e.field else None
        if line is None:
            raise
        raise ConfigError(e.message, field=e.field, line=line) from e

    logger.debug("parse_config: %s", config)
    return config


def load_config(path: Union[str, Path]) -> ModelConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def emit_config(config: ModelConfig, comment: Optional[str] = None) -> str:
    """Every field in FIELD_ORDER; parse_config(emit_config(c)) == c."""
    values = {
        "variant": config.variant.value,
        "duration": str(config.duration),
        "seed": str(config.seed),
        "n0": str(config.n0),
        "tau": str(config.tau),
        "schedule_unit": config.schedule_unit.value,
        "alpha_mode": format_alpha_mode(config.alpha_mode),
        "split_fraction": repr(float(config.split_fraction)),
        "bins": str(config.bins),
        "ensembles": str(config.ensembles),
        "snapshot_times": "[" + ", ".join(str(t) for t in config.snapshot_times) + "]",
    }
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.extend(f"{key}: {values[key]}" for key in FIELD_ORDER)
    return "\n".join(lines) + "\n"
