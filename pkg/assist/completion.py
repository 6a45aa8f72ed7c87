"""
Matrix completion by aggregating per-level rank-constrained sign matrices.
"""

import logging
import math
from typing import List, Optional, Tuple, Union

import numpy as np

from . import constants
from .constants import ResolutionPreset
from .entities import CompletionModel, Hyperparams, LevelReport, ObservedMatrix
from .estimator import fit_levels
from .exceptions import InfeasibleBudgetException, ValidationException
from .utils.helpers import as_dense_matrix, sgn

logger = logging.getLogger("assist.completion")

# Upper clamp of the theory-driven resolution.
MAX_THEORY_RESOLUTION = 50


def resolution_preset(preset: Union[ResolutionPreset, str], n_obs: int, d: int, r: int) -> int:
    """
    Resolution H for completion.

    "default" gives min(20, floor(sqrt |Omega|)); "theory" gives
    round(sqrt(|Omega| / (d r))) clamped to [1, 50].

    Args:
        preset: Preset name
        n_obs: Number of observed entries
        d: Largest matrix dimension
        r: Rank budget

    Returns:
        Positive integer H
    """
    try:
        preset = ResolutionPreset(preset)
    except ValueError:
        raise ValidationException(f"unknown resolution preset {preset!r}")
    if n_obs < 1 or d < 1 or r < 1:
        raise ValidationException(f"n_obs, d and r must be positive, got ({n_obs}, {d}, {r})")
    if preset is ResolutionPreset.DEFAULT:
        return max(1, min(constants.MAX_DEFAULT_RESOLUTION, math.isqrt(n_obs)))
    return int(min(MAX_THEORY_RESOLUTION, max(1, round(math.sqrt(n_obs / (d * r))))))


def completion_hyperparams(hp: Hyperparams, d1: int, d2: int) -> Hyperparams:
    """Lift the support budgets to the full matrix; completion constrains rank only."""
    if not 1 <= hp.r <= min(d1, d2):
        raise InfeasibleBudgetException(hp.r, d1, d2, d1, d2)
    return hp.with_overrides(s1=d1, s2=d2)


def fit_completion_with_reports(
    obs: ObservedMatrix,
    hp: Hyperparams,
    n_jobs: int = 1,
    backend: str = "loky",
    sink=None,
) -> Tuple[CompletionModel, List[LevelReport]]:
    """
    Fit the completion model and return the per-level diagnostics.

    Each level solves the weighted classification over observed entries with
    score matrix Z, rank(Z) <= r and no intercept. The support budgets of
    ``hp`` are ignored.

    Args:
        obs: Observed entries
        hp: Hyperparameters; unset H and lambda are resolved from |Omega|
        n_jobs: Number of joblib workers
        backend: joblib backend
        sink: Callable receiving AdmmRecord objects

    Returns:
        Tuple of (model, reports)

    Raises:
        InfeasibleBudgetException: When r > min(d1, d2)
    """
    hp = completion_hyperparams(hp, obs.d1, obs.d2).resolve(obs.n_obs)
    logger.info(f"completing {obs.d1}x{obs.d2} matrix from {obs.n_obs} entries, r={hp.r}, H={hp.H}")
    grid, factors, reports = fit_levels(
        obs, hp, budgets=(hp.r, obs.d1, obs.d2), n_jobs=n_jobs, backend=backend, sink=sink
    )
    model = CompletionModel(grid=grid, sign_factors=factors, scale=obs.scale, shape=obs.shape)
    return model, reports


def fit_completion(obs: ObservedMatrix, hp: Hyperparams, n_jobs: int = 1, backend: str = "loky") -> CompletionModel:
    """
    Fit one rank-r sign matrix per level from the observed entries.

    Args:
        obs: Observed entries
        hp: Hyperparameters
        n_jobs: Number of joblib workers
        backend: joblib backend

    Returns:
        CompletionModel
    """
    model, _ = fit_completion_with_reports(obs, hp, n_jobs=n_jobs, backend=backend)
    return model


def impute(model: CompletionModel) -> np.ndarray:
    """
    Estimate the full matrix as (1/(2H+1)) sum_pi sgn(Z_pi), mapped to the raw scale.

    Args:
        model: Fitted completion model

    Returns:
        Matrix (d1, d2)
    """
    signs = [sgn(tf.coefficient_matrix()) for tf in model.sign_factors]
    return model.scale.inverse(np.mean(signs, axis=0))


def completion_mae(estimate, truth, mask: Optional[np.ndarray] = None) -> float:
    """
    Mean absolute error over the masked entries (all entries by default).

    Args:
        estimate: Estimated matrix
        truth: True matrix
        mask: Boolean matrix selecting the evaluated entries

    Returns:
        Nonnegative mean absolute error

    Raises:
        ValidationException: On shape mismatch or an empty mask
    """
    estimate = as_dense_matrix(estimate, "estimate")
    truth = as_dense_matrix(truth, "truth")
    if estimate.shape != truth.shape:
        raise ValidationException(f"estimate shape {estimate.shape} differs from truth shape {truth.shape}")
    errors = np.abs(estimate - truth)
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != truth.shape:
            raise ValidationException(f"mask shape {mask.shape} differs from matrix shape {truth.shape}")
        errors = errors[mask]
    if errors.size == 0:
        raise ValidationException("mask selects no entries")
    return float(np.mean(errors))
