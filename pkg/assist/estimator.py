"""
Sign-series regression estimator: fit one classifier per level and aggregate their signs.
"""

import logging
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from .admm import solve_level
from .entities import AdmmRecord, Dataset, Hyperparams, LevelGrid, LevelReport, SignSeriesModel, TraceFunction
from .exceptions import ValidationException
from .utils.helpers import as_finite_vector, hash64, sgn

logger = logging.getLogger("assist.estimator")


def level_seed(seed: int, index: int) -> int:
    """Seed for the level at position ``index`` of the grid."""
    return hash64(int(seed), int(index))


def _fit_level(data, level: float, hp: Hyperparams, seed: int, trace: bool):
    records: List[AdmmRecord] = []
    tf, report = solve_level(data, level, hp, seed=seed, sink=records.append if trace else None)
    return tf, report, records


def fit_levels(
    data,
    hp: Hyperparams,
    budgets: Optional[Tuple[int, int, int]] = None,
    n_jobs: int = 1,
    backend: str = "loky",
    sink: Optional[Callable[[AdmmRecord], None]] = None,
) -> Tuple[LevelGrid, List[TraceFunction], List[LevelReport]]:
    """
    Fit the classifiers of every level of the grid, sequentially or with joblib.

    Per-level seeds derive from (hp.seed, level index), so the result does not
    depend on the schedule. Iteration records are forwarded to ``sink`` in grid
    order after all levels finish.

    Args:
        data: Dataset or ObservedMatrix
        hp: Hyperparameters with H resolved
        budgets: (r, s1, s2) override
        n_jobs: Number of joblib workers
        backend: joblib backend
        sink: Callable receiving AdmmRecord objects

    Returns:
        Tuple of (grid, classifiers, reports)
    """
    grid = LevelGrid(hp.H)
    trace = sink is not None
    tasks = [(level, level_seed(hp.seed, k)) for k, level in enumerate(grid.levels)]
    if n_jobs != 1:
        results = Parallel(n_jobs=n_jobs, backend=backend)(
            delayed(_fit_level)(data, float(level), hp, seed, trace) for level, seed in tasks
        )
    else:
        results = [_fit_level(data, float(level), hp, seed, trace) for level, seed in tasks]

    classifiers, reports = [], []
    for tf, report, records in results:
        classifiers.append(tf)
        reports.append(report)
        if sink is not None:
            for record in records:
                sink(record)
    return grid, classifiers, reports


def fit_with_reports(
    data: Dataset,
    hp: Hyperparams,
    n_jobs: int = 1,
    backend: str = "loky",
    sink: Optional[Callable[[AdmmRecord], None]] = None,
) -> Tuple[SignSeriesModel, List[LevelReport]]:
    """
    Fit the sign-series model and return the per-level diagnostics.

    Args:
        data: Training dataset
        hp: Hyperparameters; unset H and lambda take their sample-size defaults
        n_jobs: Number of joblib workers for the per-level fits
        backend: joblib backend
        sink: Callable receiving AdmmRecord objects

    Returns:
        Tuple of (model, reports)

    Raises:
        InfeasibleBudgetException: When the budgets do not fit the data
        SolverDivergenceException: When a level fails; the level is named
    """
    hp = hp.resolve(data.n)
    hp.check_dims(data.d1, data.d2)
    logger.info(
        f"fitting {2 * hp.H + 1} levels on n={data.n}, dims=({data.d1}, {data.d2}), p={data.p}, "
        f"r={hp.r}, s=({hp.s1}, {hp.s2}), loss={hp.loss.value}"
    )
    grid, classifiers, reports = fit_levels(data, hp, n_jobs=n_jobs, backend=backend, sink=sink)
    model = SignSeriesModel(grid=grid, classifiers=classifiers, scale=data.scale, dims=data.dims)
    return model, reports


def fit(data: Dataset, hp: Hyperparams, n_jobs: int = 1, backend: str = "loky") -> SignSeriesModel:
    """
    Fit one sign classifier per level of LevelGrid(H) and keep the response scale.

    Args:
        data: Training dataset
        hp: Hyperparameters
        n_jobs: Number of joblib workers
        backend: joblib backend

    Returns:
        SignSeriesModel
    """
    model, _ = fit_with_reports(data, hp, n_jobs=n_jobs, backend=backend)
    return model


def aggregate_signs(model: SignSeriesModel, predictors, covariates=None) -> np.ndarray:
    """Mean of sgn(phi_pi(X)) over levels, on the rescaled response scale."""
    signs = [sgn(tf.decision_function(predictors, covariates)) for tf in model.classifiers]
    return np.mean(signs, axis=0)


def predict_many(model: SignSeriesModel, predictors, covariates=None) -> np.ndarray:
    """
    Predict raw responses for a stack of predictors.

    Args:
        model: Fitted model
        predictors: Array (m, d1, d2)
        covariates: Array (m, p) when the model uses covariates

    Returns:
        Raw-scale predictions, shape (m,)
    """
    d1, d2, p = model.dims
    stack = np.asarray(predictors, dtype=np.float64)
    if stack.ndim != 3 or stack.shape[1:] != (d1, d2):
        raise ValidationException(f"predictors must have shape (m, {d1}, {d2}), got {stack.shape}")
    if p > 0 and covariates is None:
        raise ValidationException(f"model was fitted with {p} covariates")
    return model.scale.inverse(aggregate_signs(model, stack, covariates))


def predict(model: SignSeriesModel, X, W=None) -> float:
    """
    Predict the raw response of one matrix predictor.

    Args:
        model: Fitted model
        X: Predictor of shape (d1, d2)
        W: Covariate vector of length p

    Returns:
        Inverse-scaled mean of the level signs
    """
    X = np.asarray(X, dtype=np.float64)
    d1, d2, p = model.dims
    if X.shape != (d1, d2):
        raise ValidationException(f"predictor shape {X.shape} does not match ({d1}, {d2})")
    covariates = None if W is None else np.asarray(W, dtype=np.float64).reshape(1, -1)
    return float(predict_many(model, X[np.newaxis], covariates)[0])


def ideal_aggregate(f_values, H: int) -> Union[float, np.ndarray]:
    """
    Aggregate the true level signs: (1/(2H+1)) sum_pi sgn(f - pi).

    Args:
        f_values: Values of f in [-1, 1]
        H: Resolution

    Returns:
        Aggregated values, same shape as the input
    """
    grid = LevelGrid(H)
    f = np.asarray(f_values, dtype=np.float64)
    flat = as_finite_vector(f, "f values")
    if np.any(np.abs(flat) > 1.0):
        raise ValidationException("f values must lie in [-1, 1]")
    aggregated = np.mean(sgn(flat[:, np.newaxis] - grid.levels[np.newaxis, :]), axis=1)
    return float(aggregated[0]) if f.ndim == 0 else aggregated.reshape(f.shape)


def feature_importance(model: SignSeriesModel, window: int = 1) -> np.ndarray:
    """
    Entrywise maximum over levels of the moving average of |B_pi|.

    Args:
        model: Fitted model
        window: Odd moving-average length, at most 2H + 1

    Returns:
        Matrix (d1, d2)
    """
    n_levels = len(model.grid)
    if isinstance(window, bool) or int(window) != window or window < 1 or window % 2 == 0 or window > n_levels:
        raise ValidationException(f"window must be an odd integer in [1, {n_levels}], got {window}")
    weights = np.abs(np.stack([tf.coefficient_matrix() for tf in model.classifiers]))
    averaged = np.lib.stride_tricks.sliding_window_view(weights, int(window), axis=0).mean(axis=-1)
    return averaged.max(axis=0)
