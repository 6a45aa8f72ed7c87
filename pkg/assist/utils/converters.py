"""
Data conversion utilities for the ASSIST library.
"""

from dataclasses import asdict, is_dataclass
from enum import Enum
from typing import Any, Iterable

import numpy as np


def to_jsonable(obj: Any) -> Any:
    """
    Convert arrays, enums, numpy scalars and dataclasses to JSON-serializable values.

    Python floats are emitted with their shortest round-trip representation,
    so decoding restores them bit for bit.

    Args:
        obj: Object to convert

    Returns:
        Plain Python structure
    """
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items() if v is not None}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(item) for item in obj]
    return obj


def format_number(value: float, float_format: str = "%.17g") -> str:
    """
    Format a number for a CSV cell.

    Args:
        value: Number
        float_format: printf-style format

    Returns:
        Formatted string
    """
    return float_format % float(value)


def format_row(values: Iterable[float], float_format: str = "%.17g") -> str:
    """Format numbers as one comma-separated line."""
    return ",".join(format_number(v, float_format) for v in values)

