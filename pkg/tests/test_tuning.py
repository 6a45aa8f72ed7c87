import math

import numpy as np
import pytest

from assist.constants import Metric
from assist.entities import Dataset, Hyperparams, ResponseScale
from assist.exceptions import ValidationException
from assist.simgen import gen_regression
from assist.tuning import (
    TABLE_COLUMNS,
    CrossValidationRow,
    CrossValidationTable,
    auc_score,
    cross_validate,
    kfold_split,
    one_se_rule,
    score_predictions,
)


def test_kfold_split_partitions_samples():
    splits = kfold_split(11, 3, seed=4)
    assert len(splits) == 3
    held_out = np.concatenate([fold for _, fold in splits])
    np.testing.assert_array_equal(np.sort(held_out), np.arange(11))
    assert sorted(len(fold) for _, fold in splits) == [3, 4, 4]
    for train, fold in splits:
        assert not set(train) & set(fold)
        assert len(train) + len(fold) == 11


def test_kfold_split_is_seeded():
    first = kfold_split(20, 5, seed=1)
    second = kfold_split(20, 5, seed=1)
    for (a, b), (c, d) in zip(first, second):
        np.testing.assert_array_equal(a, c)
        np.testing.assert_array_equal(b, d)


@pytest.mark.parametrize("k", [1, 12, 2.5])
def test_kfold_split_rejects_bad_k(k):
    with pytest.raises(ValidationException):
        kfold_split(11, k)


def test_auc_score():
    labels = np.array([False, False, True, True])
    assert auc_score(labels, [0.1, 0.2, 0.8, 0.9]) == 1.0
    assert auc_score(labels, [0.9, 0.8, 0.2, 0.1]) == 0.0
    assert auc_score(labels, [0.5, 0.5, 0.5, 0.5]) == 0.5
    with pytest.raises(ValidationException):
        auc_score(np.ones(3, dtype=bool), [0.1, 0.2, 0.3])


def test_score_predictions_metrics():
    data = Dataset(
        np.zeros((4, 1, 1)),
        np.array([-1.0, -0.5, 0.5, 1.0]),
        np.zeros((4, 0)),
        ResponseScale(2.0, 2.0),
    )
    # raw responses 0, 1, 3, 4
    predicted = np.array([1.0, 1.0, 3.0, 1.0])
    assert score_predictions("l1", predicted, data) == pytest.approx(1.0)
    assert score_predictions(Metric.MAE, predicted, data) == pytest.approx(0.5)
    assert score_predictions("misclass-at-half", predicted, data) == pytest.approx(0.25)
    assert score_predictions("auc", np.array([0.0, 1.0, 3.0, 4.0]), data) == -1.0


def row(r, s, mean, se=0.1):
    return CrossValidationRow(Hyperparams(r=r, s1=s, s2=s), mean, se)


def test_one_se_rule_prefers_parsimony():
    table = CrossValidationTable([row(5, 5, 1.00), row(2, 2, 1.05), row(1, 3, 1.30)])
    selected = one_se_rule(table)
    assert (selected.r, selected.s1, selected.s2) == (2, 2, 2)


def test_one_se_rule_keeps_best_when_alone():
    table = CrossValidationTable([row(5, 5, 1.00, se=0.01), row(2, 2, 1.05)])
    assert one_se_rule(table).r == 5


def test_one_se_rule_skips_failed_rows():
    failed = CrossValidationRow(Hyperparams(), math.nan, math.nan, "failed")
    table = CrossValidationTable([failed, row(3, 3, 2.0)])
    assert one_se_rule(table).r == 3
    with pytest.raises(ValidationException):
        one_se_rule(CrossValidationTable([failed]))


def test_cross_validate_marks_failed_points(small_dataset, fast_hp):
    grid = [fast_hp, fast_hp.with_overrides(s1=9, s2=9)]
    table = cross_validate(small_dataset, grid, k=3, seed=2)
    assert len(table) == 2
    good, bad = table.rows
    assert good.ok and len(good.fold_scores) == 3
    assert np.isfinite(good.mean) and good.se >= 0.0
    assert bad.status == "failed" and math.isnan(bad.mean)
    assert bad.error
    assert one_se_rule(table) == fast_hp

    frame = table.to_frame()
    assert list(frame.columns) == TABLE_COLUMNS
    assert list(frame["status"]) == ["ok", "failed"]
    assert frame.loc[0, "loss"] == "hinge"


def test_cross_validate_rejects_empty_grid_and_unknown_metric(small_dataset, fast_hp):
    with pytest.raises(ValidationException):
        cross_validate(small_dataset, [], k=3)
    with pytest.raises(ValidationException):
        cross_validate(small_dataset, [fast_hp], k=3, metric="rmse")


@pytest.mark.bench
def test_one_se_rule_avoids_oversized_budgets():
    template = Hyperparams(H=3, n_starts=1, max_admm_iters=30, max_inner_iters=100)
    oversized = 0
    for seed in range(10):
        data, _ = gen_regression(10, 2, 2, 200, seed=seed)
        grid = [template.with_overrides(r=r, s1=s, s2=s, seed=seed) for r, s in ((1, 1), (2, 2), (4, 4))]
        selected = one_se_rule(cross_validate(data, grid, k=5, seed=seed, n_jobs=-1))
        oversized += (selected.r, selected.s1) == (4, 4)
    assert oversized <= 2
