"""
Sign convention, weighted 0-1 loss and large-margin surrogate losses.
"""

from typing import Union

import numpy as np

from .constants import LossKind
from .entities import Dataset, TraceFunction
from .exceptions import ValidationException
from .utils.helpers import sgn

__all__ = [
    "sgn",
    "hinge",
    "psi",
    "margin_loss",
    "weighted_01_risk",
    "weighted_margin_risk",
    "weighted_01_loss",
    "weighted_margin_objective",
]


def hinge(z):
    """Hinge loss (1 - z)_+."""
    return np.maximum(1.0 - np.asarray(z, dtype=np.float64), 0.0)


def psi(z):
    """Psi loss 2 min(1, (1 - z)_+)."""
    return 2.0 * np.minimum(1.0, hinge(z))


def _margin_kind(kind: Union[LossKind, str]) -> LossKind:
    try:
        kind = LossKind(kind)
    except ValueError:
        raise ValidationException(f"unknown loss {kind!r}")
    if kind is LossKind.ZERO_ONE:
        raise ValidationException("zero-one loss is not a margin loss; use weighted_01_loss")
    return kind


def margin_loss(kind: Union[LossKind, str], z):
    """
    Evaluate a large-margin loss F(z).

    Args:
        kind: hinge or psi
        z: Margin value(s)

    Returns:
        Nonnegative loss, same shape as z (float for scalar input)

    Raises:
        ValidationException: For the zero-one kind or an unknown tag
    """
    kind = _margin_kind(kind)
    if not np.all(np.isfinite(z)):
        raise ValidationException("margins must be finite")
    values = hinge(z) if kind is LossKind.HINGE else psi(z)
    return float(values) if np.ndim(z) == 0 else values


def weighted_01_risk(scores: np.ndarray, responses: np.ndarray, level: float) -> float:
    """
    (1/2n) sum |y_i - pi| |sgn(y_i - pi) - sgn(score_i)| on precomputed scores.
    """
    shifted = responses - level
    mismatch = np.abs(sgn(shifted) - sgn(scores))
    return float(np.sum(np.abs(shifted) * mismatch) / (2.0 * responses.shape[0]))


def weighted_margin_risk(scores: np.ndarray, responses: np.ndarray, level: float, kind: LossKind) -> float:
    """
    (1/n) sum |y_i - pi| F(score_i sgn(y_i - pi)) on precomputed scores.
    """
    kind = _margin_kind(kind)
    shifted = responses - level
    margins = scores * sgn(shifted)
    values = hinge(margins) if kind is LossKind.HINGE else psi(margins)
    return float(np.mean(np.abs(shifted) * values))


def _scores(tf: TraceFunction, data: Dataset) -> np.ndarray:
    if (tf.d1, tf.d2, tf.p) != data.dims:
        raise ValidationException(f"classifier dims {(tf.d1, tf.d2, tf.p)} do not match data dims {data.dims}")
    return tf.decision_function(data.predictors, data.covariates if data.p > 0 else None)


def weighted_01_loss(tf: TraceFunction, data: Dataset, level: float) -> float:
    """
    Weighted 0-1 loss of a classifier at a level.

    Each sample is weighted by |Y_i - pi|; only signs of phi enter.

    Args:
        tf: Classifier
        data: Dataset with rescaled responses
        level: Level pi

    Returns:
        Nonnegative loss

    Raises:
        ValidationException: On dimension mismatch
    """
    return weighted_01_risk(_scores(tf, data), data.responses, level)


def weighted_margin_objective(
    tf: TraceFunction,
    data: Dataset,
    level: float,
    kind: Union[LossKind, str],
    lam: float,
) -> float:
    """
    Penalized empirical F-risk with ridge penalty lam * ||B||_F^2.

    Args:
        tf: Classifier
        data: Dataset with rescaled responses
        level: Level pi
        kind: hinge or psi
        lam: Ridge weight, >= 0

    Returns:
        Nonnegative objective value
    """
    if not lam >= 0:
        raise ValidationException(f"lambda must be >= 0, got {lam}")
    kind = _margin_kind(kind)
    risk = weighted_margin_risk(_scores(tf, data), data.responses, level, kind)
    return risk + lam * float(np.sum(tf.coefficient_matrix() ** 2))
