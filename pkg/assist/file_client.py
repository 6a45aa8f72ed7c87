"""
Low-level file client for ASSIST datasets, triplets, matrices and JSON documents.
"""

import json
import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .config import AssistConfig
from .constants import FORMAT_VERSION
from .exceptions import DecodeException, EmptyDatasetException, SchemaVersionException
from .utils.converters import format_row

Line = Tuple[int, str]


class FileClient:
    """Low-level client for reading and writing the versioned text formats."""

    def __init__(self, config: Optional[AssistConfig] = None):
        """
        Initialize the file client.

        Args:
            config: Runtime configuration (number format)
        """
        self.config = config or AssistConfig()
        self.logger = logging.getLogger("assist.files")

    def read_lines(self, path: str) -> List[Line]:
        """
        Read the non-blank lines of a text file with their 1-based line numbers.

        Args:
            path: File path

        Returns:
            List of (line number, stripped text)

        Raises:
            DecodeException: When the file cannot be read
        """
        self.logger.debug(f"Reading {path}")
        try:
            with open(path, "r", encoding="utf-8") as handle:
                return [(number, text.strip()) for number, text in enumerate(handle, start=1) if text.strip()]
        except (OSError, UnicodeDecodeError) as e:
            raise DecodeException(f"cannot read file: {e}", path=path)

    def parse_header(
        self, path: str, line: Line, magic: str, keys: Sequence[str], float_keys: Sequence[str] = ()
    ) -> Dict[str, float]:
        """
        Parse a header line ``<magic> <version> key=value ...``.

        Fields named in ``float_keys`` are optional finite reals; every other
        field is an integer.

        Args:
            path: File path (for error messages)
            line: (line number, text)
            magic: Expected leading token
            keys: Integer keys the header must carry
            float_keys: Optional real-valued keys

        Returns:
            Mapping of key to value

        Raises:
            DecodeException: On a malformed header
            SchemaVersionException: On an unsupported version
        """
        number, text = line
        tokens = text.split()
        if not tokens or tokens[0] != magic:
            raise DecodeException(f"expected header starting with {magic!r}, got {text[:40]!r}", path, number)
        if len(tokens) < 2 or tokens[1] != FORMAT_VERSION:
            found = tokens[1] if len(tokens) > 1 else None
            raise SchemaVersionException(f"unsupported format version {found!r}, expected {FORMAT_VERSION!r}", path, number)
        values = {}
        for token in tokens[2:]:
            key, sep, raw = token.partition("=")
            if not sep:
                raise DecodeException(f"malformed header field {token!r}", path, number)
            if key in float_keys:
                try:
                    values[key] = float(raw)
                except ValueError:
                    raise DecodeException(f"header field {key} must be a number, got {raw!r}", path, number)
                if not np.isfinite(values[key]):
                    raise DecodeException(f"header field {key} must be finite", path, number)
                continue
            try:
                values[key] = int(raw)
            except ValueError:
                raise DecodeException(f"header field {key} must be an integer, got {raw!r}", path, number)
        missing = [key for key in keys if key not in values]
        if missing:
            raise DecodeException(f"header is missing {', '.join(missing)}", path, number)
        for key in keys:
            if values[key] < 0:
                raise DecodeException(f"header field {key} must be nonnegative, got {values[key]}", path, number)
        return values

    def parse_rows(self, path: str, lines: Sequence[Line], width: int) -> np.ndarray:
        """
        Parse comma-separated numeric rows of a fixed width.

        Args:
            path: File path (for error messages)
            lines: (line number, text) pairs
            width: Expected number of columns

        Returns:
            Array (len(lines), width)

        Raises:
            DecodeException: On ragged or non-numeric rows
        """
        table = np.empty((len(lines), width))
        for k, (number, text) in enumerate(lines):
            cells = text.split(",")
            if len(cells) != width:
                raise DecodeException(f"expected {width} columns, got {len(cells)}", path, number)
            try:
                table[k] = [float(cell) for cell in cells]
            except ValueError as e:
                raise DecodeException(f"non-numeric cell: {e}", path, number)
            if not np.all(np.isfinite(table[k])):
                raise DecodeException("non-finite value", path, number)
        return table

    def read_table(
        self, path: str, magic: str, keys: Sequence[str], width_of, float_keys: Sequence[str] = ()
    ) -> Tuple[Dict[str, float], np.ndarray, List[int]]:
        """
        Read a headed numeric table.

        Args:
            path: File path
            magic: Header magic token
            keys: Required header keys
            width_of: Callable mapping the header to the expected row width
            float_keys: Optional real-valued header keys

        Returns:
            Tuple of (header, rows, line number of each row)

        Raises:
            EmptyDatasetException: When the file or its body is empty
        """
        lines = self.read_lines(path)
        if not lines:
            raise EmptyDatasetException("file is empty", path=path)
        header = self.parse_header(path, lines[0], magic, keys, float_keys)
        body = lines[1:]
        if not body:
            raise EmptyDatasetException("file holds no data rows", path=path)
        return header, self.parse_rows(path, body, width_of(header)), [number for number, _ in body]

    def write_table(self, path: str, header: str, rows: Iterable[Iterable[float]]) -> None:
        """
        Write a header line followed by numeric rows.

        Args:
            path: File path
            header: Header line (without newline)
            rows: Numeric rows
        """
        self.logger.debug(f"Writing {path}")
        float_format = self.config.float_format
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            if header:
                handle.write(header + "\n")
            for row in rows:
                handle.write(format_row(row, float_format) + "\n")

    def read_json(self, path: str) -> Dict:
        """
        Read a JSON object.

        Raises:
            DecodeException: On unreadable or malformed JSON
        """
        self.logger.debug(f"Reading {path}")
        try:
            with open(path, "r", encoding="utf-8") as handle:
                data = json.load(handle)
        except OSError as e:
            raise DecodeException(f"cannot read file: {e}", path=path)
        except json.JSONDecodeError as e:
            raise DecodeException(f"malformed JSON: {e.msg}", path=path, row=e.lineno)
        if not isinstance(data, dict):
            raise DecodeException("expected a JSON object", path=path)
        return data

    def write_json(self, path: str, data: Dict) -> None:
        """Write a JSON object with sorted keys."""
        self.logger.debug(f"Writing {path}")
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            json.dump(data, handle, indent=1, sort_keys=True, allow_nan=False)
            handle.write("\n")
