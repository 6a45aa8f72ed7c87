"""
K-fold cross-validation over hyperparameter grids and the one-standard-error rule.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.stats import rankdata

from .constants import Metric
from .entities import Dataset, Hyperparams
from .estimator import fit, predict_many
from .exceptions import AssistException, ValidationException
from .utils.helpers import make_rng

logger = logging.getLogger("assist.tuning")

TABLE_COLUMNS = ["r", "s1", "s2", "H", "lambda", "loss", "mean", "se", "status"]


def kfold_split(n: int, k: int, seed: Optional[int] = 0) -> List[Tuple[np.ndarray, np.ndarray]]:
    """
    Partition range(n) into k shuffled folds whose sizes differ by at most one.

    Args:
        n: Number of samples
        k: Number of folds, 2 <= k <= n
        seed: Shuffle seed

    Returns:
        List of (train indices, validation indices), both sorted
    """
    if isinstance(k, bool) or int(k) != k or not 2 <= k <= n:
        raise ValidationException(f"number of folds must satisfy 2 <= k <= n={n}, got {k}")
    order = make_rng(seed).permutation(n)
    splits = []
    for fold in np.array_split(order, int(k)):
        held_out = np.zeros(n, dtype=bool)
        held_out[fold] = True
        splits.append((np.flatnonzero(~held_out), np.sort(fold)))
    return splits


def auc_score(labels: np.ndarray, scores: np.ndarray) -> float:
    """
    Area under the ROC curve via the rank-sum statistic; ties count one half.
    """
    labels = np.asarray(labels, dtype=bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationException("AUC needs both classes in the evaluation set")
    ranks = rankdata(scores)
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def score_predictions(metric: Union[Metric, str], predicted: np.ndarray, data: Dataset) -> float:
    """
    Loss-type score of raw predictions on a held-out dataset.

    Score-type metrics (AUC) are negated so that smaller is always better.

    Args:
        metric: l1, misclass-at-half, mae or auc
        predicted: Raw-scale predictions
        data: Held-out dataset

    Returns:
        Score
    """
    metric = Metric(metric)
    rescaled = data.scale.forward(predicted)
    if metric is Metric.L1:
        return float(np.mean(np.abs(predicted - data.raw_responses)))
    if metric is Metric.MAE:
        return float(np.mean(np.abs(rescaled - data.responses)))
    if metric is Metric.MISCLASS_AT_HALF:
        return float(np.mean((rescaled > 0) != (data.responses > 0)))
    return -auc_score(data.responses > 0, predicted)


@dataclass
class CrossValidationRow:
    """Cross-validated score of one grid point."""

    hyperparams: Hyperparams
    mean: float
    se: float
    status: str = "ok"
    fold_scores: List[float] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok" and math.isfinite(self.mean)


@dataclass
class CrossValidationTable:
    """Rows in grid order plus the metric they were scored with."""

    rows: List[CrossValidationRow]
    metric: Metric = Metric.L1

    def __len__(self) -> int:
        return len(self.rows)

    def to_frame(self) -> pd.DataFrame:
        """Table as a DataFrame with the CSV column schema."""
        records = []
        for row in self.rows:
            hp = row.hyperparams
            records.append({
                "r": hp.r,
                "s1": hp.s1,
                "s2": hp.s2,
                "H": hp.H,
                "lambda": hp.lam,
                "loss": hp.loss.value,
                "mean": row.mean,
                "se": row.se,
                "status": row.status,
            })
        return pd.DataFrame.from_records(records, columns=TABLE_COLUMNS)


def _fold_score(data: Dataset, hp: Hyperparams, train: np.ndarray, held_out: np.ndarray, metric: Metric) -> float:
    model = fit(data.subset(train), hp)
    validation = data.subset(held_out)
    covariates = validation.covariates if validation.p > 0 else None
    return score_predictions(metric, predict_many(model, validation.predictors, covariates), validation)


def _safe_fold_score(data, hp, train, held_out, metric):
    try:
        return _fold_score(data, hp, train, held_out, metric), None
    except AssistException as e:
        return math.nan, e.error_message


def cross_validate(
    data: Dataset,
    grid: Sequence[Hyperparams],
    k: int = 5,
    metric: Union[Metric, str] = Metric.L1,
    seed: Optional[int] = 0,
    n_jobs: int = 1,
    backend: str = "loky",
) -> CrossValidationTable:
    """
    Score every grid point by k-fold cross-validation.

    The same folds are used for all grid points. A fit error marks its row
    failed instead of aborting the sweep.

    Args:
        data: Dataset
        grid: Hyperparameter candidates
        k: Number of folds
        metric: l1, misclass-at-half, mae or auc
        seed: Fold seed
        n_jobs: joblib workers over (grid point, fold) tasks
        backend: joblib backend

    Returns:
        CrossValidationTable in grid order; se = sample std / sqrt(k)
    """
    grid = list(grid)
    if not grid:
        raise ValidationException("hyperparameter grid is empty")
    try:
        metric = Metric(metric)
    except ValueError:
        raise ValidationException(f"unknown metric {metric!r}")
    folds = kfold_split(data.n, k, seed)
    tasks = [(hp, train, held_out) for hp in grid for train, held_out in folds]
    if n_jobs != 1:
        results = Parallel(n_jobs=n_jobs, backend=backend)(
            delayed(_safe_fold_score)(data, hp, train, held_out, metric) for hp, train, held_out in tasks
        )
    else:
        results = [_safe_fold_score(data, hp, train, held_out, metric) for hp, train, held_out in tasks]

    rows = []
    for g, hp in enumerate(grid):
        chunk = results[g * len(folds):(g + 1) * len(folds)]
        scores = [score for score, _ in chunk]
        errors = [error for _, error in chunk if error is not None]
        if errors:
            logger.warning(f"grid point r={hp.r} s=({hp.s1}, {hp.s2}) failed: {errors[0]}")
            rows.append(CrossValidationRow(hp, math.nan, math.nan, "failed", scores, errors[0]))
            continue
        mean = float(np.mean(scores))
        se = float(np.std(scores, ddof=1) / math.sqrt(len(scores)))
        logger.info(f"grid point r={hp.r} s=({hp.s1}, {hp.s2}): {metric.value}={mean:.6g} (se {se:.3g})")
        rows.append(CrossValidationRow(hp, mean, se, "ok", scores))
    return CrossValidationTable(rows, metric)


def one_se_rule(table: CrossValidationTable) -> Hyperparams:
    """
    Most parsimonious grid point within one standard error of the best.

    Candidates have mean <= best mean + best se. Parsimony orders by
    r (s1 + s2), then r, then s1 + s2, then grid order.

    Args:
        table: Cross-validation table

    Returns:
        Selected hyperparameters

    Raises:
        ValidationException: When every row failed
    """
    usable = [(index, row) for index, row in enumerate(table.rows) if row.ok]
    if not usable:
        raise ValidationException("every cross-validation row failed")
    _, best = min(usable, key=lambda item: (item[1].mean, item[0]))
    threshold = best.mean + (best.se if math.isfinite(best.se) else 0.0)
    candidates = [(index, row) for index, row in usable if row.mean <= threshold]

    def parsimony(item):
        index, row = item
        hp = row.hyperparams
        return hp.complexity, hp.r, hp.s1 + hp.s2, index

    return min(candidates, key=parsimony)[1].hyperparams
