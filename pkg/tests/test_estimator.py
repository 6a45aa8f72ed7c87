import numpy as np
import pytest

from assist.entities import Dataset, Hyperparams, LevelGrid, ResponseScale, SignSeriesModel, TraceFunction
from assist.estimator import (
    feature_importance,
    fit,
    fit_levels,
    fit_with_reports,
    ideal_aggregate,
    level_seed,
    predict,
    predict_many,
)
from assist.exceptions import InfeasibleBudgetException, ValidationException


def constant_model(intercepts, scale=None, d=2):
    """Model whose level classifiers are constants b_pi."""
    H = (len(intercepts) - 1) // 2
    grid = LevelGrid(H)
    classifiers = [
        TraceFunction(u=np.zeros((d, 1)), v=np.zeros((d, 1)), intercept=b, level=level)
        for b, level in zip(intercepts, grid.levels)
    ]
    return SignSeriesModel(grid, classifiers, scale or ResponseScale(), (d, d, 0))


def test_fit_produces_one_classifier_per_level(small_dataset, fast_hp):
    model, reports = fit_with_reports(small_dataset, fast_hp.with_overrides(H=2))
    assert len(model.classifiers) == 5
    assert len(reports) == 5
    np.testing.assert_allclose([tf.level for tf in model.classifiers], model.grid.levels)
    np.testing.assert_allclose([report.level for report in reports], model.grid.levels)
    assert model.dims == small_dataset.dims
    assert model.scale == small_dataset.scale


def test_fit_resolves_default_resolution(small_dataset):
    hp = Hyperparams(r=1, s1=1, s2=1, n_starts=1, max_admm_iters=2, max_inner_iters=20)
    model = fit(small_dataset, hp)
    # n = 30 gives H = floor(sqrt(30)) = 5
    assert model.grid.H == 5


def test_predictions_stay_in_response_range(small_dataset, fast_hp):
    model = fit(small_dataset, fast_hp)
    predictions = predict_many(model, small_dataset.predictors)
    raw = small_dataset.raw_responses
    assert np.all(predictions >= raw.min() - 1e-12)
    assert np.all(predictions <= raw.max() + 1e-12)


def test_fit_is_deterministic(small_dataset, fast_hp):
    first = predict_many(fit(small_dataset, fast_hp), small_dataset.predictors)
    second = predict_many(fit(small_dataset, fast_hp), small_dataset.predictors)
    np.testing.assert_array_equal(first, second)


def test_parallel_fit_matches_sequential(small_dataset, fast_hp):
    _, sequential, _ = fit_levels(small_dataset, fast_hp)
    _, parallel, _ = fit_levels(small_dataset, fast_hp, n_jobs=2, backend="threading")
    for a, b in zip(sequential, parallel):
        np.testing.assert_array_equal(a.coefficient_matrix(), b.coefficient_matrix())
        assert a.intercept == b.intercept


def test_sink_receives_records_in_level_order(small_dataset, fast_hp):
    records = []
    fit_levels(small_dataset, fast_hp, sink=records.append)
    levels = [record.level for record in records]
    assert levels == sorted(levels)
    assert set(levels) == {-1.0, 0.0, 1.0}


def test_level_seeds_are_distinct():
    assert len({level_seed(0, k) for k in range(41)}) == 41
    assert level_seed(3, 2) == level_seed(3, 2)


def test_fit_rejects_infeasible_budgets(small_dataset):
    with pytest.raises(InfeasibleBudgetException):
        fit(small_dataset, Hyperparams(r=1, s1=6, s2=6, H=1))


def test_predict_averages_level_signs():
    # Signs +, +, - at levels -1, 0, 1 average to 1/3; sgn(0) counts as -1.
    model = constant_model([0.5, 0.5, -0.5], ResponseScale(10.0, 2.0))
    X = np.zeros((2, 2))
    assert predict(model, X) == pytest.approx(10.0 + 2.0 / 3.0)
    assert predict(constant_model([0.0, 0.0, 0.0]), X) == pytest.approx(-1.0)


def test_predict_matches_predict_many(small_dataset, fast_hp):
    model = fit(small_dataset, fast_hp)
    many = predict_many(model, small_dataset.predictors[:3])
    single = [predict(model, X) for X in small_dataset.predictors[:3]]
    np.testing.assert_allclose(many, single)


def test_predict_shape_checks():
    model = constant_model([0.5, 0.5, -0.5])
    with pytest.raises(ValidationException):
        predict(model, np.zeros((3, 3)))
    with pytest.raises(ValidationException):
        predict_many(model, np.zeros((2, 2)))


def test_covariates_are_required_when_fitted():
    rng = np.random.default_rng(2)
    predictors = rng.uniform(size=(20, 2, 2))
    covariates = rng.standard_normal((20, 1))
    responses = covariates[:, 0] + predictors[:, 0, 0]
    data = Dataset.from_arrays(predictors, responses, covariates)
    model = fit(data, Hyperparams(r=1, s1=1, s2=1, H=1, n_starts=1, max_admm_iters=3, max_inner_iters=30))
    assert model.dims == (2, 2, 1)
    assert all(tf.p == 1 for tf in model.classifiers)
    with pytest.raises(ValidationException):
        predict_many(model, predictors)
    assert predict_many(model, predictors, covariates).shape == (20,)


@pytest.mark.parametrize("f, H, expected", [(0.3, 2, 0.2), (1.0, 2, 0.6), (-1.0, 2, -1.0), (0.0, 1, -1.0 / 3.0)])
def test_ideal_aggregate_values(f, H, expected):
    assert ideal_aggregate(f, H) == pytest.approx(expected)


def test_ideal_aggregate_approximates_f(rng):
    f = rng.uniform(-1.0, 1.0, size=500)
    for H in (1, 3, 10):
        assert np.max(np.abs(ideal_aggregate(f, H) - f)) <= 1.0 / H + 1e-12


def test_ideal_aggregate_bias_bound_on_fine_grid():
    f = np.linspace(-1.0, 1.0, 10_001)
    for H in range(1, 51):
        assert np.max(np.abs(ideal_aggregate(f, H) - f)) <= 1.0 / H + 1e-12


def test_predictions_ignore_positive_classifier_scaling(small_dataset, fast_hp):
    model = fit(small_dataset, fast_hp)
    expected = predict_many(model, small_dataset.predictors)
    for alpha in (0.01, 0.5, 1.0):
        scaled = SignSeriesModel(
            model.grid, [tf.scaled(alpha) for tf in model.classifiers], model.scale, model.dims
        )
        np.testing.assert_array_equal(predict_many(scaled, small_dataset.predictors), expected)


def test_ideal_aggregate_rejects_out_of_range():
    with pytest.raises(ValidationException):
        ideal_aggregate([0.5, 1.5], 2)


def test_feature_importance_window_one_is_level_max():
    grid = LevelGrid(1)
    scales = [1.0, 3.0, 2.0]
    classifiers = [
        TraceFunction(u=np.array([[a], [0.0]]), v=np.array([[1.0], [0.0]]), level=level)
        for a, level in zip(scales, grid.levels)
    ]
    model = SignSeriesModel(grid, classifiers, ResponseScale(), (2, 2, 0))
    np.testing.assert_allclose(feature_importance(model, 1), [[3.0, 0.0], [0.0, 0.0]])
    np.testing.assert_allclose(feature_importance(model, 3), [[2.0, 0.0], [0.0, 0.0]])


@pytest.mark.parametrize("window", [0, 2, 5])
def test_feature_importance_window_checks(window):
    with pytest.raises(ValidationException):
        feature_importance(constant_model([0.5, 0.5, -0.5]), window)
