"""Flat key=value configuration files.

A file overrides built-in defaults; command-line flags override the file.

    # accuracy
    rel_tol = 1e-10
    quad_order = 160
    n = 2
    m = 4
"""

import logging
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from src.errors import ParameterError
from src.params import EvalConfig

logger = logging.getLogger(__name__)

MODEL_KEYS = ("n", "m", "mu", "allow_outside_envelope")
MC_KEYS = ("samples", "seed", "streams", "rotated_mean")
EVAL_KEYS = tuple(f.name for f in fields(EvalConfig))
KNOWN_KEYS = frozenset(MODEL_KEYS + MC_KEYS + EVAL_KEYS)

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise ParameterError(f"expected a boolean, got {text!r}")


def parse_config_text(text: str, source: str = "<string>") -> Dict[str, str]:
    """
    Parse key=value lines; '#' starts a comment, blank lines are skipped.

    Raises:
        ParameterError: On a malformed line, a duplicate or an unknown key

    Example:
        >>> parse_config_text("n = 2  # size\\nmu=1.5")
        {'n': '2', 'mu': '1.5'}
    """
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{source}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ParameterError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ParameterError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def load_config_file(path: Optional[Union[str, Path]]) -> Dict[str, str]:
    """Read a config file; None gives an empty mapping."""
    if path is None:
        return {}
    file_path = Path(path)
    text = file_path.read_text(encoding="utf-8")
    values = parse_config_text(text, source=str(file_path))
    logger.debug("loaded %d settings from %s", len(values), file_path)
    return values


def merge(file_values: Mapping[str, Any], flag_values: Mapping[str, Any]) -> Dict[str, Any]:
    """Flags that were given (not None) win over file values."""
    merged: Dict[str, Any] = dict(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    return merged


def eval_config_from(values: Mapping[str, Any]) -> EvalConfig:
    """EvalConfig from the evaluation keys of a merged mapping."""
    try:
        return EvalConfig.from_mapping({k: values[k] for k in EVAL_KEYS if k in values})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError(f"invalid evaluation setting: {exc}") from exc
