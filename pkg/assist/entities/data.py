"""
Training data entities: response scale, samples, datasets and observed matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .base import Entity
from ..exceptions import ValidationException
from ..utils.helpers import as_finite_vector, frozen


@dataclass(frozen=True)
class ResponseScale(Entity):
    """
    Affine map between raw responses and the unit interval.

    A raw response y maps to (y - shift) / span.
    """

    shift: float = 0.0
    span: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.shift) or not np.isfinite(self.span) or self.span <= 0:
            raise ValidationException(
                f"ResponseScale needs finite shift and positive span, got ({self.shift}, {self.span})"
            )
        object.__setattr__(self, "shift", float(self.shift))
        object.__setattr__(self, "span", float(self.span))

    @classmethod
    def identity(cls) -> "ResponseScale":
        """Scale for responses that already lie in [-1, 1]."""
        return cls(0.0, 1.0)

    def forward(self, raw):
        """Map raw responses into rescaled units."""
        return (np.asarray(raw, dtype=np.float64) - self.shift) / self.span

    def inverse(self, scaled):
        """Map rescaled values back to raw responses."""
        return np.asarray(scaled, dtype=np.float64) * self.span + self.shift

    @property
    def raw_range(self) -> Tuple[float, float]:
        """Raw values corresponding to -1 and +1."""
        return self.shift - self.span, self.shift + self.span


def rescale_responses(raw_responses: Sequence[float]) -> Tuple[np.ndarray, ResponseScale]:
    """
    Rescale raw responses onto [-1, 1] by midrange and half-range.

    Args:
        raw_responses: Non-empty finite responses

    Returns:
        Tuple of (rescaled responses, scale). A constant array gets span 1.

    Raises:
        ValidationException: When the input is empty or non-finite
    """
    raw = as_finite_vector(raw_responses, "responses")
    lo, hi = float(raw.min()), float(raw.max())
    shift = (lo + hi) / 2.0
    span = (hi - lo) / 2.0
    if span <= 0:
        span = 1.0
    scale = ResponseScale(shift, span)
    return np.clip(scale.forward(raw), -1.0, 1.0), scale


def _apply_scale(raw: np.ndarray, scale: Optional[ResponseScale]) -> Tuple[np.ndarray, ResponseScale]:
    if scale is None:
        return rescale_responses(raw)
    scaled = scale.forward(raw)
    if np.any(np.abs(scaled) > 1.0 + 1e-12):
        raise ValidationException(
            f"Responses leave [-1, 1] under the given scale (shift={scale.shift}, span={scale.span})"
        )
    return np.clip(scaled, -1.0, 1.0), scale


@dataclass(frozen=True)
class Sample:
    """One training sample: matrix predictor, covariates and rescaled response."""

    predictor: np.ndarray
    covariates: np.ndarray
    response: float


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Matrix-predictor regression data.

    Attributes:
        predictors: Array (n, d1, d2)
        responses: Rescaled responses in [-1, 1], shape (n,)
        covariates: Array (n, p), p may be 0
        scale: Map between raw and rescaled responses
    """

    predictors: np.ndarray
    responses: np.ndarray
    covariates: np.ndarray
    scale: ResponseScale

    def __post_init__(self):
        predictors = np.ascontiguousarray(self.predictors, dtype=np.float64)
        if predictors.ndim != 3:
            raise ValidationException(f"predictors must have shape (n, d1, d2), got {predictors.shape}")
        n = predictors.shape[0]
        if n < 1 or predictors.shape[1] < 1 or predictors.shape[2] < 1:
            raise ValidationException(f"Dataset needs n >= 1 and positive dimensions, got {predictors.shape}")
        if not np.all(np.isfinite(predictors)):
            raise ValidationException("predictors contain non-finite entries")
        responses = as_finite_vector(self.responses, "responses")
        if responses.shape[0] != n:
            raise ValidationException(f"{responses.shape[0]} responses for {n} predictors")
        if np.any(np.abs(responses) > 1.0):
            raise ValidationException("rescaled responses must lie in [-1, 1]")
        covariates = np.ascontiguousarray(self.covariates, dtype=np.float64)
        if covariates.ndim == 1 and covariates.size == 0:
            covariates = covariates.reshape(n, 0)
        if covariates.ndim != 2 or covariates.shape[0] != n:
            raise ValidationException(f"covariates must have shape (n, p), got {covariates.shape}")
        if not np.all(np.isfinite(covariates)):
            raise ValidationException("covariates contain non-finite entries")
        object.__setattr__(self, "predictors", frozen(predictors))
        object.__setattr__(self, "responses", frozen(responses))
        object.__setattr__(self, "covariates", frozen(covariates))

    @classmethod
    def from_arrays(
        cls,
        predictors,
        raw_responses,
        covariates=None,
        scale: Optional[ResponseScale] = None,
    ) -> "Dataset":
        """
        Build a dataset from raw arrays, rescaling the responses.

        Args:
            predictors: Array (n, d1, d2)
            raw_responses: Raw responses, shape (n,)
            covariates: Optional array (n, p)
            scale: Explicit scale; fitted by midrange/half-range when omitted

        Returns:
            Dataset instance
        """
        predictors = np.asarray(predictors, dtype=np.float64)
        raw = as_finite_vector(raw_responses, "responses")
        responses, scale = _apply_scale(raw, scale)
        n = predictors.shape[0] if predictors.ndim == 3 else 0
        if covariates is None:
            covariates = np.zeros((n, 0))
        return cls(predictors, responses, np.asarray(covariates, dtype=np.float64), scale)

    @property
    def n(self) -> int:
        return self.predictors.shape[0]

    @property
    def d1(self) -> int:
        return self.predictors.shape[1]

    @property
    def d2(self) -> int:
        return self.predictors.shape[2]

    @property
    def p(self) -> int:
        return self.covariates.shape[1]

    @property
    def dims(self) -> Tuple[int, int, int]:
        return self.d1, self.d2, self.p

    @property
    def design(self) -> np.ndarray:
        """Predictors flattened row-major to shape (n, d1 * d2)."""
        return self.predictors.reshape(self.n, self.d1 * self.d2)

    @property
    def raw_responses(self) -> np.ndarray:
        return self.scale.inverse(self.responses)

    @property
    def samples(self) -> List[Sample]:
        return [
            Sample(self.predictors[i], self.covariates[i], float(self.responses[i]))
            for i in range(self.n)
        ]

    def subset(self, indices) -> "Dataset":
        """
        Restrict to a subset of samples, keeping the parent scale.

        Args:
            indices: Sample indices

        Returns:
            Dataset with the selected samples
        """
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size == 0:
            raise ValidationException("subset needs at least one index")
        return Dataset(self.predictors[idx], self.responses[idx], self.covariates[idx], self.scale)


@dataclass(frozen=True, eq=False)
class ObservedMatrix:
    """
    Sparse triplet view of a partially observed matrix.

    Duplicate (row, col) pairs are allowed and count once per occurrence.

    Attributes:
        d1, d2: Matrix dimensions
        rows, cols: 0-based indices of observed entries
        values: Rescaled observed values in [-1, 1]
        scale: Map between raw and rescaled values
    """

    d1: int
    d2: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    scale: ResponseScale

    def __post_init__(self):
        if int(self.d1) < 1 or int(self.d2) < 1:
            raise ValidationException(f"ObservedMatrix needs positive dimensions, got ({self.d1}, {self.d2})")
        rows = np.asarray(self.rows, dtype=np.int64).reshape(-1)
        cols = np.asarray(self.cols, dtype=np.int64).reshape(-1)
        values = as_finite_vector(self.values, "observed values", allow_empty=True)
        if rows.size == 0:
            raise ValidationException("ObservedMatrix needs at least one observed entry")
        if not (rows.size == cols.size == values.size):
            raise ValidationException("rows, cols and values must have equal length")
        if rows.min() < 0 or rows.max() >= self.d1 or cols.min() < 0 or cols.max() >= self.d2:
            raise ValidationException(f"observed indices out of range for a {self.d1}x{self.d2} matrix")
        if np.any(np.abs(values) > 1.0):
            raise ValidationException("rescaled observed values must lie in [-1, 1]")
        object.__setattr__(self, "d1", int(self.d1))
        object.__setattr__(self, "d2", int(self.d2))
        object.__setattr__(self, "rows", frozen(rows))
        object.__setattr__(self, "cols", frozen(cols))
        object.__setattr__(self, "values", frozen(values))

    @classmethod
    def from_triplets(
        cls,
        d1: int,
        d2: int,
        rows,
        cols,
        raw_values,
        scale: Optional[ResponseScale] = None,
    ) -> "ObservedMatrix":
        """
        Build an observed matrix from raw triplets.

        Args:
            d1, d2: Matrix dimensions
            rows, cols: 0-based entry indices
            raw_values: Raw observed values
            scale: Explicit scale; fitted by midrange/half-range when omitted

        Returns:
            ObservedMatrix instance
        """
        raw = as_finite_vector(raw_values, "observed values")
        values, scale = _apply_scale(raw, scale)
        return cls(d1, d2, np.asarray(rows), np.asarray(cols), values, scale)

    @classmethod
    def from_matrix(cls, matrix, mask=None, scale: Optional[ResponseScale] = None) -> "ObservedMatrix":
        """
        Observe the entries of a dense matrix selected by a boolean mask.

        Args:
            matrix: Dense raw matrix
            mask: Boolean array of the same shape (all entries when omitted)
            scale: Explicit scale

        Returns:
            ObservedMatrix instance
        """
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise ValidationException(f"matrix must be two-dimensional, got shape {matrix.shape}")
        if mask is None:
            mask = np.ones(matrix.shape, dtype=bool)
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != matrix.shape:
            raise ValidationException(f"mask shape {mask.shape} differs from matrix shape {matrix.shape}")
        rows, cols = np.nonzero(mask)
        return cls.from_triplets(matrix.shape[0], matrix.shape[1], rows, cols, matrix[rows, cols], scale)

    @property
    def n_obs(self) -> int:
        return int(self.values.size)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.d1, self.d2

    @property
    def raw_values(self) -> np.ndarray:
        return self.scale.inverse(self.values)

    @property
    def entries(self) -> List[Tuple[int, int, float]]:
        return [(int(i), int(j), float(y)) for i, j, y in zip(self.rows, self.cols, self.values)]

    def mask(self) -> np.ndarray:
        """Boolean (d1, d2) array marking observed entries."""
        observed = np.zeros(self.shape, dtype=bool)
        observed[self.rows, self.cols] = True
        return observed

    def cell_means(self) -> np.ndarray:
        """
        Raw observed value per cell, averaging duplicates; NaN where unobserved.
        """
        flat = self.rows * self.d2 + self.cols
        size = self.d1 * self.d2
        totals = np.bincount(flat, weights=self.raw_values, minlength=size)
        counts = np.bincount(flat, minlength=size)
        means = np.full(size, np.nan)
        seen = counts > 0
        means[seen] = totals[seen] / counts[seen]
        return means.reshape(self.shape)
