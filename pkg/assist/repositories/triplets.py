"""
Triplet and dense matrix repositories for matrix completion.
"""

import numpy as np

from .base import SCALE_KEYS, FileRepository, scale_fields, stored_scale
from ..constants import FORMAT_VERSION, TRIPLETS_MAGIC
from ..entities import ObservedMatrix
from ..exceptions import DecodeException, ValidationException
from ..file_client import FileClient
from ..utils.helpers import as_dense_matrix

HEADER_KEYS = ("d1", "d2")


class TripletRepository(FileRepository[ObservedMatrix]):
    """Repository for ``#assist-triplets`` files with rows ``i,j,y`` (0-based)."""

    def __init__(self, file_client: FileClient):
        """
        Initialize triplet repository.

        Args:
            file_client: File client instance
        """
        super().__init__(file_client, "triplets", ObservedMatrix)

    def load(self, path: str) -> ObservedMatrix:
        """
        Load observed entries, restoring the stored value scale.

        Args:
            path: File path

        Returns:
            ObservedMatrix instance

        Raises:
            DecodeException: On malformed rows or out-of-range indices
        """
        header, table, numbers = self.file_client.read_table(
            path, TRIPLETS_MAGIC, HEADER_KEYS, lambda h: 3, SCALE_KEYS
        )
        d1, d2 = header["d1"], header["d2"]
        indices = table[:, :2]
        if np.any(indices != np.floor(indices)):
            raise DecodeException("row and column indices must be integers", path)
        rows, cols = indices.astype(np.int64).T
        bad = np.flatnonzero((rows < 0) | (rows >= d1) | (cols < 0) | (cols >= d2))
        if bad.size:
            raise DecodeException(f"index out of range for a {d1}x{d2} matrix", path, numbers[bad[0]])
        try:
            return ObservedMatrix.from_triplets(d1, d2, rows, cols, table[:, 2], stored_scale(header))
        except ValidationException as e:
            raise DecodeException(e.error_message, path)

    def save(self, entity: ObservedMatrix, path: str) -> None:
        """
        Save observed entries with raw values.

        Args:
            entity: Observed matrix
            path: File path
        """
        header = f"{TRIPLETS_MAGIC} {FORMAT_VERSION} d1={entity.d1} d2={entity.d2} {scale_fields(entity.scale)}"
        rows = [(i, j, y) for i, j, y in zip(entity.rows, entity.cols, entity.raw_values)]
        self.file_client.write_table(path, header, rows)


class MatrixRepository(FileRepository[np.ndarray]):
    """Repository for plain dense matrices stored as headerless CSV."""

    def __init__(self, file_client: FileClient):
        """
        Initialize matrix repository.

        Args:
            file_client: File client instance
        """
        super().__init__(file_client, "matrix", np.ndarray)

    def load(self, path: str) -> np.ndarray:
        """
        Load a dense matrix.

        Raises:
            DecodeException: On ragged or non-numeric rows
        """
        lines = self.file_client.read_lines(path)
        if not lines:
            raise DecodeException("file is empty", path=path)
        width = len(lines[0][1].split(","))
        return self.file_client.parse_rows(path, lines, width)

    def save(self, entity: np.ndarray, path: str) -> None:
        """Save a dense matrix, one row per line."""
        self.file_client.write_table(path, "", as_dense_matrix(entity))
