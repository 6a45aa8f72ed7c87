"""
Helper functions for the ASSIST library.
"""

import hashlib
import struct
from typing import Optional, Sequence, Union

import numpy as np

from ..exceptions import ValidationException

ArrayLike = Union[np.ndarray, Sequence]


def as_dense_matrix(values: ArrayLike, name: str = "matrix") -> np.ndarray:
    """
    Validate and convert input into a dense real matrix.

    Args:
        values: Nested sequence or array with two dimensions
        name: Name used in error messages

    Returns:
        A float64 array of shape (rows, cols)

    Raises:
        ValidationException: When the input is not a finite, non-empty 2-D array
    """
    try:
        matrix = np.array(values, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise ValidationException(f"{name} is not numeric: {e}")
    if matrix.ndim != 2:
        raise ValidationException(f"{name} must be two-dimensional, got shape {matrix.shape}")
    if matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise ValidationException(f"{name} must be non-empty, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValidationException(f"{name} contains non-finite entries")
    return matrix


def as_finite_vector(values: ArrayLike, name: str = "vector", allow_empty: bool = False) -> np.ndarray:
    """
    Validate and convert input into a finite 1-D float array.

    Args:
        values: Sequence or array
        name: Name used in error messages
        allow_empty: Whether a zero-length vector is acceptable

    Returns:
        A float64 array of shape (length,)
    """
    try:
        vector = np.array(values, dtype=np.float64).reshape(-1)
    except (TypeError, ValueError) as e:
        raise ValidationException(f"{name} is not numeric: {e}")
    if vector.size == 0 and not allow_empty:
        raise ValidationException(f"{name} must be non-empty")
    if not np.all(np.isfinite(vector)):
        raise ValidationException(f"{name} contains non-finite entries")
    return vector


def frozen(array: np.ndarray) -> np.ndarray:
    """Return the array marked read-only."""
    array.setflags(write=False)
    return array


def sgn(x):
    """
    Sign with sgn(0) = -1.

    Args:
        x: Scalar or array

    Returns:
        +1 where x > 0 and -1 elsewhere (int for scalars, float array otherwise)
    """
    if np.ndim(x) == 0:
        return 1 if x > 0 else -1
    return np.where(np.asarray(x) > 0, 1.0, -1.0)


def hash64(*parts: Union[int, float, str]) -> int:
    """
    Stable 64-bit hash of a tuple of integers, floats and strings.

    Used to derive per-level and per-replicate seeds that do not depend on
    scheduling order.

    Args:
        parts: Values to hash

    Returns:
        Unsigned 64-bit integer
    """
    digest = hashlib.blake2b(digest_size=8)
    for part in parts:
        if isinstance(part, bool) or isinstance(part, (int, np.integer)):
            digest.update(b"i" + int(part).to_bytes(16, "little", signed=True))
        elif isinstance(part, (float, np.floating)):
            digest.update(b"f" + struct.pack("<d", float(part)))
        else:
            digest.update(b"s" + str(part).encode("utf-8"))
    return int.from_bytes(digest.digest(), "little")


def make_rng(seed: Optional[int], *stream: int) -> np.random.Generator:
    """
    Create a numpy Generator for a seed and an optional sub-stream path.

    Args:
        seed: Base seed (None draws fresh entropy)
        stream: Extra integers selecting an independent sub-stream

    Returns:
        Random generator
    """
    if seed is None:
        return np.random.default_rng()
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(s) & 0xFFFFFFFFFFFFFFFF for s in stream]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def nonzero_rows(matrix: np.ndarray) -> np.ndarray:
    """Indices of rows holding at least one nonzero entry."""
    return np.flatnonzero(np.any(matrix != 0, axis=1))


def nonzero_cols(matrix: np.ndarray) -> np.ndarray:
    """Indices of columns holding at least one nonzero entry."""
    return np.flatnonzero(np.any(matrix != 0, axis=0))
