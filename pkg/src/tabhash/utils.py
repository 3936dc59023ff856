"""Utility functions for key files and report serialization."""

import dataclasses
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import tomli_w

from .exceptions import KeyFileError

logger = logging.getLogger(__name__)


# Key files
def parse_keys(text: str, q: Optional[int] = None) -> List[Tuple[int, ...]]:
    """Parse one key per line, characters separated by whitespace.

    Args:
        text: File contents; blank lines and '#' comments are skipped
        q: Expected number of characters per key, or None to take it from the first key

    Returns:
        List of keys as integer tuples

    Raises:
        KeyFileError: On non-integer characters or keys of the wrong length
    """
    keys = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            key = tuple(int(x) for x in line.split())
        except ValueError:
            raise KeyFileError(f"line {number}: keys must be whitespace-separated integers, got {line!r}") from None
        if q is None:
            q = len(key)
        if len(key) != q:
            raise KeyFileError(f"line {number}: expected {q} characters, got {len(key)}")
        keys.append(key)
    return keys


def read_keys(source: Union[str, Path], q: Optional[int] = None) -> List[Tuple[int, ...]]:
    """Read a key file, or standard input when ``source`` is '-'."""
    if str(source) == "-":
        return parse_keys(sys.stdin.read(), q)
    try:
        text = Path(source).read_text()
    except OSError as e:
        raise KeyFileError(f"cannot read key file {source}: {e}") from e
    return parse_keys(text, q)


def keys_to_array(keys: List[Tuple[int, ...]], q: int) -> np.ndarray:
    """(N, q) int64 array for batch hashing."""
    return np.asarray(keys, dtype=np.int64).reshape(-1, q)


# Serialization
def prepare_data_for_serialization(value: Any) -> Any:
    """Recursively convert dataclasses, tuples and numpy scalars to plain data.

    None values are dropped from mappings since TOML has no null.
    """
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        value = {f.name: getattr(value, f.name) for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        return {str(k): prepare_data_for_serialization(v) for k, v in value.items() if v is not None}
    if isinstance(value, (list, tuple)):
        return [prepare_data_for_serialization(item) for item in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    return value


def to_json(data: Any, filename: Optional[str] = None) -> str:
    """Convert a report (or any dataclass tree) to JSON.

    Args:
        data: Report, dataclass, or plain data
        filename: Optional filename to save to

    Returns:
        JSON string representation of the data
    """
    json_str = json.dumps(prepare_data_for_serialization(data), indent=2, default=str)

    if filename:
        with open(filename, 'w') as f:
            f.write(json_str)
        logger.info(f"Saved JSON report to {filename}")

    return json_str


def to_toml(data: Any, filename: Optional[str] = None, table: str = "report") -> str:
    """Convert a report to TOML, wrapped in a top-level ``table``.

    Args:
        data: Report, dataclass, or plain data
        filename: Optional filename to save to
        table: Name of the top-level table (TOML needs a mapping at the root)

    Returns:
        TOML string representation of the data
    """
    toml_data: Dict[str, Any] = {table: prepare_data_for_serialization(data)}
    toml_bytes = io.BytesIO()
    tomli_w.dump(toml_data, toml_bytes)
    toml_str = toml_bytes.getvalue().decode('utf-8')

    if filename:
        with open(filename, 'w') as f:
            f.write(toml_str)
        logger.info(f"Saved TOML report to {filename}")

    return toml_str
