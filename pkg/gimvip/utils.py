"""
Utility functions shared by the solver modules and the command-line surface.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Optional, Tuple, Union

import numpy as np
from pydantic import ValidationError

from .exceptions import ConfigError

logger = logging.getLogger(__name__)


def format_real(x: float) -> str:
    """Decimal text with 17 significant digits, the CSV number format."""
    return f"{x:.17g}"


def json_real(x: Optional[float]) -> Union[float, str, None]:
    """Map a real to a JSON-safe value.

    Infinities become the strings "inf" / "-inf", NaN and None become null.
    """
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy values and non-finite floats for json.dumps."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return json_real(float(obj))
    return obj


def safe_json_dumps(obj: Any, indent: Optional[int] = 2) -> str:
    """Dump an object to JSON after converting numpy and non-finite values.

    Args:
        obj: Object to dump
        indent: Optional indentation level

    Returns:
        JSON string
    """
    return json.dumps(to_jsonable(obj), indent=indent, ensure_ascii=False, allow_nan=False)


def write_json(path: Union[str, Path], obj: Any) -> Path:
    path = Path(path)
    path.write_text(safe_json_dumps(obj) + "\n", encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path


def extract_error_message(e: Exception) -> str:
    """Extract a user-friendly error message from an exception.

    Args:
        e: The exception

    Returns:
        Error message string
    """
    if hasattr(e, "message"):
        return str(e.message)
    elif hasattr(e, "args") and e.args:
        return str(e.args[0])
    else:
        return str(e)


def parse_override(text: str) -> Tuple[str, float]:
    """Parse a KEY=VALUE command-line override into (key, float value)."""
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise ValueError(f"Override must look like KEY=VALUE, got {text!r}")
    return key.strip(), float(value)


def build_config(model_cls: Any, **values: Any) -> Any:
    """Validate configuration values into ``model_cls``, reporting failures as ConfigError.

    Values that are None are left out so the model defaults apply.
    """
    try:
        return model_cls.model_validate({k: v for k, v in values.items() if v is not None})
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or model_cls.__name__
        raise ConfigError(f"{field}: {first['msg']}", data={"field": field}) from e
