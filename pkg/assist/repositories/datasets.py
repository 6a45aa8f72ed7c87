"""
Dataset repository for the ASSIST dataset format.

Line 1: ``#assist-dataset v1 d1=<> d2=<> p=<> n=<> shift=<> span=<>``; then
one row per sample holding the d1 * d2 row-major predictor entries, the p
covariates and the raw response. ``shift`` and ``span`` carry the response
scale; files without them are rescaled from their responses.
"""

import numpy as np

from .base import SCALE_KEYS, FileRepository, scale_fields, stored_scale
from ..constants import DATASET_MAGIC, FORMAT_VERSION
from ..entities import Dataset
from ..exceptions import DecodeException, EmptyDatasetException, ValidationException
from ..file_client import FileClient

HEADER_KEYS = ("d1", "d2", "p", "n")


class DatasetRepository(FileRepository[Dataset]):
    """Repository for Dataset files."""

    def __init__(self, file_client: FileClient):
        """
        Initialize dataset repository.

        Args:
            file_client: File client instance
        """
        super().__init__(file_client, "dataset", Dataset)

    def load(self, path: str) -> Dataset:
        """
        Load a dataset, restoring the stored response scale.

        Args:
            path: File path

        Returns:
            Dataset instance

        Raises:
            EmptyDatasetException: When the file holds no samples
            DecodeException: On a malformed header, ragged rows or a row count mismatch
        """
        header, table, _ = self.file_client.read_table(
            path, DATASET_MAGIC, HEADER_KEYS, lambda h: h["d1"] * h["d2"] + h["p"] + 1, SCALE_KEYS
        )
        d1, d2, p, n = (header[key] for key in HEADER_KEYS)
        if d1 < 1 or d2 < 1:
            raise DecodeException(f"dimensions must be positive, got d1={d1}, d2={d2}", path, 1)
        if n == 0:
            raise EmptyDatasetException("header declares n=0", path, 1)
        if table.shape[0] != n:
            raise DecodeException(f"header declares n={n} samples, found {table.shape[0]}", path, 1)
        predictors = table[:, : d1 * d2].reshape(n, d1, d2)
        covariates = table[:, d1 * d2: d1 * d2 + p]
        try:
            return Dataset.from_arrays(predictors, table[:, -1], covariates, stored_scale(header))
        except ValidationException as e:
            raise DecodeException(e.error_message, path)

    def save(self, entity: Dataset, path: str) -> None:
        """
        Save a dataset with raw responses.

        Args:
            entity: Dataset
            path: File path
        """
        d1, d2, p = entity.dims
        header = f"{DATASET_MAGIC} {FORMAT_VERSION} d1={d1} d2={d2} p={p} n={entity.n} {scale_fields(entity.scale)}"
        rows = np.hstack([entity.design, entity.covariates, entity.raw_responses[:, np.newaxis]])
        self.file_client.write_table(path, header, rows)
