import pickle

import numpy as np
import pytest

from assist.entities import (
    Dataset,
    Hyperparams,
    LevelGrid,
    ObservedMatrix,
    ResponseScale,
    SignSeriesModel,
    TraceFunction,
    rescale_responses,
)
from assist.exceptions import (
    DecodeException,
    InfeasibleBudgetException,
    SolverDivergenceException,
    ValidationException,
)


def test_level_grid_levels():
    grid = LevelGrid(2)
    assert len(grid) == 5
    np.testing.assert_allclose(grid.levels, [-1.0, -0.5, 0.0, 0.5, 1.0])


@pytest.mark.parametrize("H", [1, 3, 7, 20])
def test_level_grid_is_equally_spaced(H):
    levels = LevelGrid(H).levels
    assert levels.size == 2 * H + 1
    np.testing.assert_allclose(np.diff(levels), np.full(2 * H, 1.0 / H), atol=1e-12)
    assert (levels[0], levels[H], levels[-1]) == (-1.0, 0.0, 1.0)


@pytest.mark.parametrize("H", [0, -1, 1.5, True])
def test_level_grid_rejects_bad_resolution(H):
    with pytest.raises(ValidationException):
        LevelGrid(H)


def test_rescale_responses_midrange():
    scaled, scale = rescale_responses([0.0, 2.0, 4.0])
    np.testing.assert_allclose(scaled, [-1.0, 0.0, 1.0])
    assert (scale.shift, scale.span) == (2.0, 2.0)
    np.testing.assert_allclose(scale.inverse(scaled), [0.0, 2.0, 4.0])


def test_rescale_round_trips_random_arrays():
    rng = np.random.default_rng(12)
    for _ in range(1000):
        size = int(rng.integers(1, 50))
        raw = rng.normal(rng.uniform(-100.0, 100.0), rng.uniform(1e-3, 1e3), size=size)
        scaled, scale = rescale_responses(raw)
        assert np.all(np.abs(scaled) <= 1.0)
        np.testing.assert_allclose(scale.inverse(scaled), raw, rtol=1e-12, atol=1e-12 * np.abs(raw).max())


def test_rescale_constant_responses():
    scaled, scale = rescale_responses([3.0, 3.0])
    assert scale.span == 1.0
    np.testing.assert_allclose(scaled, [0.0, 0.0])


def test_rescale_rejects_non_finite():
    with pytest.raises(ValidationException):
        rescale_responses([0.0, np.nan])


def test_explicit_scale_out_of_range():
    predictors = np.zeros((2, 2, 2))
    with pytest.raises(ValidationException):
        Dataset.from_arrays(predictors, [0.5, 1.5], scale=ResponseScale.identity())


def test_dataset_binary_labels_map_to_unit_signs():
    data = Dataset.from_arrays(np.zeros((3, 2, 2)), [0.0, 1.0, 1.0])
    np.testing.assert_allclose(data.responses, [-1.0, 1.0, 1.0])
    np.testing.assert_allclose(data.raw_responses, [0.0, 1.0, 1.0])


def test_dataset_subset_keeps_scale(small_dataset):
    part = small_dataset.subset([0, 2, 4])
    assert part.n == 3
    assert part.scale == small_dataset.scale
    np.testing.assert_array_equal(part.responses, small_dataset.responses[[0, 2, 4]])


def test_dataset_is_read_only(small_dataset):
    with pytest.raises(ValueError):
        small_dataset.predictors[0, 0, 0] = 1.0


def test_dataset_shape_checks():
    with pytest.raises(ValidationException):
        Dataset.from_arrays(np.zeros((3, 2, 2)), [0.0, 1.0])
    with pytest.raises(ValidationException):
        Dataset.from_arrays(np.zeros((2, 2, 2)), [0.0, 1.0], covariates=np.zeros((3, 1)))


def test_observed_matrix_cell_means_average_duplicates():
    obs = ObservedMatrix.from_triplets(2, 2, [0, 0, 1], [1, 1, 0], [1.0, 3.0, 5.0])
    means = obs.cell_means()
    assert means[0, 1] == pytest.approx(2.0)
    assert means[1, 0] == pytest.approx(5.0)
    assert np.isnan(means[0, 0])
    assert obs.mask().sum() == 2
    assert obs.n_obs == 3


def test_observed_matrix_index_range():
    with pytest.raises(ValidationException):
        ObservedMatrix.from_triplets(2, 2, [0, 2], [0, 0], [1.0, 2.0])


def test_observed_matrix_needs_an_entry():
    with pytest.raises(ValidationException):
        ObservedMatrix.from_matrix(np.ones((2, 2)), np.zeros((2, 2), dtype=bool))


def test_trace_function_decision_function(rng):
    u = rng.standard_normal((3, 2))
    v = rng.standard_normal((4, 2))
    tf = TraceFunction(u=u, v=v, intercept=0.25)
    X = rng.standard_normal((5, 3, 4))
    expected = np.array([np.trace(x.T @ (u @ v.T)) for x in X]) + 0.25
    np.testing.assert_allclose(tf.decision_function(X), expected)
    assert tf.decision_function(X[0]).shape == (1,)


def test_trace_function_support_budget():
    u = np.array([[1.0], [1.0], [0.0]])
    v = np.array([[1.0], [0.0]])
    with pytest.raises(ValidationException):
        TraceFunction(u=u, v=v, support_budget=(1, 1))
    tf = TraceFunction(u=u, v=v, support_budget=(2, 1))
    assert tf.support_budget == (2, 1)


def test_trace_function_intercept_bound():
    u = np.zeros((2, 1))
    with pytest.raises(ValidationException):
        TraceFunction(u=u, v=u, intercept=1.5)
    assert TraceFunction(u=u, v=u, intercept=-1.0).intercept_bound() == 1.0


def test_trace_function_scaling_keeps_signs(rng):
    tf = TraceFunction(u=rng.standard_normal((3, 1)), v=rng.standard_normal((2, 1)), intercept=0.5)
    X = rng.standard_normal((40, 3, 2))
    half = tf.scaled(0.5)
    np.testing.assert_allclose(half.decision_function(X), 0.5 * tf.decision_function(X))
    with pytest.raises(ValidationException):
        tf.scaled(0.0)


def test_trace_function_covariates():
    tf = TraceFunction(u=np.zeros((2, 1)), v=np.zeros((2, 1)), covariate_coeffs=[2.0])
    np.testing.assert_allclose(tf.decision_function(np.zeros((2, 2, 2)), [[1.0], [-1.0]]), [2.0, -2.0])
    with pytest.raises(ValidationException):
        tf.decision_function(np.zeros((1, 2, 2)))


def test_sign_series_model_checks_levels():
    tf = TraceFunction(u=np.zeros((2, 1)), v=np.zeros((2, 1)), level=0.0)
    with pytest.raises(ValidationException):
        SignSeriesModel(LevelGrid(1), [tf, tf, tf], ResponseScale(), (2, 2, 0))


def test_sign_series_model_round_trip():
    grid = LevelGrid(1)
    classifiers = [
        TraceFunction(u=np.array([[1.0], [0.0]]), v=np.array([[0.5], [0.0]]), intercept=0.1 * k, level=level)
        for k, level in enumerate(grid.levels)
    ]
    model = SignSeriesModel(grid, classifiers, ResponseScale(1.0, 2.0), (2, 2, 0))
    restored = SignSeriesModel.from_dict(model.to_dict())
    assert restored.grid == grid
    assert restored.scale == model.scale
    assert restored.dims == (2, 2, 0)
    for a, b in zip(model.classifiers, restored.classifiers):
        np.testing.assert_array_equal(a.u, b.u)
        assert a.intercept == b.intercept


def test_hyperparams_validation():
    with pytest.raises(ValidationException):
        Hyperparams(loss="zero-one-ish")
    with pytest.raises(ValidationException):
        Hyperparams(lam=-1.0)
    with pytest.raises(ValidationException):
        Hyperparams(rho_growth=1.0)


def test_hyperparams_check_dims():
    hp = Hyperparams(r=1, s1=5, s2=2)
    with pytest.raises(InfeasibleBudgetException):
        hp.check_dims(4, 4)
    hp.check_dims(5, 2)


def test_hyperparams_rank_above_support_fails_only_at_check():
    hp = Hyperparams(r=3, s1=2, s2=5)
    with pytest.raises(InfeasibleBudgetException):
        hp.check_dims(10, 10)


@pytest.mark.parametrize("n, H, lam", [(100, 10, 0.01), (1000, 20, 0.001), (4, 2, 0.1)])
def test_hyperparams_resolve_defaults(n, H, lam):
    hp = Hyperparams().resolve(n)
    assert hp.H == H
    assert hp.lam == pytest.approx(lam)


def test_hyperparams_resolve_keeps_explicit_values():
    hp = Hyperparams(H=3, lam=0.5).resolve(1000)
    assert (hp.H, hp.lam) == (3, 0.5)


def test_hyperparams_config_aliases():
    hp = Hyperparams.from_config({"r": 2, "s1": 3, "s2": 3, "lambda": 0.05, "loss": "psi"})
    assert hp.lam == 0.05
    assert hp.loss.value == "psi"
    assert hp.to_dict()["lambda"] == 0.05
    assert hp.with_overrides(**{"lambda": 0.2, "r": None}).lam == 0.2
    with pytest.raises(ValidationException):
        Hyperparams.from_config({"rank": 2})
    with pytest.raises(ValidationException):
        hp.with_overrides(rank=2)


def test_hyperparams_complexity():
    assert Hyperparams(r=2, s1=3, s2=4).complexity == 14


def test_exceptions_survive_pickling():
    error = pickle.loads(pickle.dumps(InfeasibleBudgetException(3, 2, 2, 4, 4)))
    assert isinstance(error, InfeasibleBudgetException)
    assert error.budgets == (3, 2, 2)
    assert "r=3" in error.error_message

    error = pickle.loads(pickle.dumps(SolverDivergenceException("blew up", level=0.5)))
    assert error.level == 0.5

    error = pickle.loads(pickle.dumps(DecodeException("bad", path="x.csv", row=3)))
    assert (error.path, error.row) == ("x.csv", 3)
    assert error.error_message.startswith("x.csv:3:")
