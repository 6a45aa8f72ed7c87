import numpy as np
import pytest

from assist.admm import (
    EntryDesign,
    MatrixDesign,
    WeightedProblem,
    dual_update,
    fit_sign_classifier,
    multiplier_update,
    primal_update,
    solve_level,
)
from assist.constants import LossKind
from assist.entities import Dataset, Hyperparams, ObservedMatrix, ResponseScale
from assist.exceptions import InfeasibleBudgetException, ValidationException
from assist.loss import hinge, weighted_01_loss
from assist.simgen import gen_regression
from assist.utils.helpers import nonzero_cols, nonzero_rows


def hinge_objective(problem, point, center, mu):
    B, b, c = point
    z = problem.labels * problem.scores(B, b, c)
    return float(np.mean(problem.weights * hinge(z)) + mu * np.sum((B - center) ** 2))


def test_matrix_design_adjoint(rng):
    predictors = rng.standard_normal((5, 3, 2))
    design = MatrixDesign(predictors)
    B = rng.standard_normal((3, 2))
    g = rng.standard_normal(5)
    np.testing.assert_allclose(design.scores(B), np.einsum("mij,ij->m", predictors, B))
    # <adjoint(g), B> = <g, scores(B)>
    assert np.sum(design.adjoint(g) * B) == pytest.approx(g @ design.scores(B))


def test_entry_design_accumulates_duplicates():
    design = EntryDesign(2, 3, np.array([0, 0, 1]), np.array([2, 2, 0]))
    np.testing.assert_allclose(design.adjoint(np.array([1.0, 2.0, 5.0])), [[0, 0, 3.0], [5.0, 0, 0]])
    B = np.arange(6.0).reshape(2, 3)
    np.testing.assert_allclose(design.scores(B), [2.0, 2.0, 3.0])


def test_problem_from_observed_has_no_intercept():
    obs = ObservedMatrix.from_matrix(np.array([[0.0, 1.0], [2.0, 3.0]]))
    problem = WeightedProblem.from_observed(obs, 0.0)
    assert not problem.fit_intercept
    assert problem.p == 0
    np.testing.assert_allclose(problem.weights, np.abs(obs.values))


def test_multiplier_update():
    multiplier = np.ones((2, 2))
    B = np.full((2, 2), 3.0)
    S = np.full((2, 2), 1.0)
    np.testing.assert_allclose(multiplier_update(multiplier, B, S, 0.5), np.full((2, 2), 3.0))
    with pytest.raises(ValidationException):
        multiplier_update(multiplier, np.zeros((2, 3)), S, 0.5)


def test_dual_update_is_feasible(rng):
    B = rng.standard_normal((6, 6))
    multiplier = rng.standard_normal((6, 6))
    S = dual_update(B, multiplier, 2.0, (1, 2, 3))
    assert nonzero_rows(S).size <= 2
    assert nonzero_cols(S).size <= 3
    assert np.linalg.matrix_rank(S, tol=1e-9) <= 1
    with pytest.raises(ValidationException):
        dual_update(B, multiplier, 0.0, (1, 2, 3))


def test_primal_update_with_zero_weights_returns_center():
    predictors = np.ones((3, 2, 2))
    data = Dataset(predictors, np.zeros(3), np.zeros((3, 0)), ResponseScale.identity())
    S = np.array([[1.0, 0.0], [0.0, 0.0]])
    multiplier = np.array([[0.5, 0.0], [0.0, 0.0]])
    B, b, c = primal_update(data, 0.0, S, multiplier, rho=1.0, lam=1.0, kind="hinge")
    np.testing.assert_allclose(B, (2.0 * S - multiplier) / 4.0)
    assert b == 0.0
    assert c.shape == (0,)


def test_primal_update_does_not_increase_objective(small_dataset, rng):
    problem = WeightedProblem.from_dataset(small_dataset, 0.0)
    S = rng.standard_normal((4, 4))
    multiplier = np.zeros((4, 4))
    rho, lam = 0.5, 0.1
    mu = rho + lam
    center = (2.0 * rho * S - multiplier) / (2.0 * mu)
    start = (np.zeros((4, 4)), 0.0, np.zeros(0))
    point = primal_update(problem, 0.0, S, multiplier, rho, lam, LossKind.HINGE, max_inner_iters=200)
    assert hinge_objective(problem, point, center, mu) <= hinge_objective(problem, start, center, mu) + 1e-12


def test_primal_update_rejects_zero_one(small_dataset):
    S = np.zeros((4, 4))
    with pytest.raises(ValidationException):
        primal_update(small_dataset, 0.0, S, S, 1.0, 0.1, "zero-one")


def test_solve_level_returns_feasible_classifier(small_dataset, fast_hp):
    tf, report = solve_level(small_dataset, 0.0, fast_hp)
    assert tf.level == 0.0
    assert tf.rank_budget == 1
    assert nonzero_rows(tf.u).size <= 2 and nonzero_rows(tf.v).size <= 2
    assert abs(tf.intercept) <= tf.intercept_bound() + 1e-9
    assert report.level == 0.0
    assert 1 <= report.iterations <= fast_hp.max_admm_iters
    assert np.isfinite(report.objective)


def test_solve_level_is_deterministic(small_dataset, fast_hp):
    first, _ = solve_level(small_dataset, 0.5, fast_hp, seed=11)
    second, _ = solve_level(small_dataset, 0.5, fast_hp, seed=11)
    np.testing.assert_array_equal(first.coefficient_matrix(), second.coefficient_matrix())
    assert first.intercept == second.intercept


def test_solve_level_streams_records(small_dataset, fast_hp):
    records = []
    hp = fast_hp.with_overrides(n_starts=2)
    _, report = solve_level(small_dataset, -0.5, hp, sink=records.append)
    starts = {record.start for record in records}
    assert starts == {0, 1}
    first_start = [record for record in records if record.start == 0]
    assert [record.iteration for record in first_start] == list(range(1, len(first_start) + 1))
    rhos = [record.rho for record in first_start]
    assert all(later > earlier for earlier, later in zip(rhos, rhos[1:]))
    assert report.start in starts


def test_solve_level_psi_loss(small_dataset, fast_hp):
    tf, report = solve_level(small_dataset, 0.0, fast_hp.with_overrides(loss="psi"))
    assert np.all(np.isfinite(tf.coefficient_matrix()))
    assert np.isfinite(report.objective)


def test_fit_sign_classifier_checks_budgets(small_dataset):
    with pytest.raises(InfeasibleBudgetException):
        fit_sign_classifier(small_dataset, 0.0, Hyperparams(r=1, s1=5, s2=1, H=1))


def test_fit_sign_classifier_on_observed_matrix():
    obs = ObservedMatrix.from_matrix(np.array([[1.0, -1.0, 1.0], [-1.0, 1.0, -1.0], [1.0, -1.0, 1.0]]))
    hp = Hyperparams(r=1, s1=3, s2=3, H=1, lam=0.001, n_starts=1, max_admm_iters=10, max_inner_iters=200)
    tf, _ = solve_level(obs, 0.0, hp)
    assert tf.intercept == 0.0
    assert tf.coefficient_matrix().shape == (3, 3)


def test_separable_level_beats_constant_classifier():
    # One informative and one noise entry; every 1x2 matrix has rank <= 1.
    rng = np.random.default_rng(5)
    predictors = rng.uniform(size=(80, 1, 2))
    labels = np.where(predictors[:, 0, 0] > 0.5, 1.0, -1.0)
    data = Dataset.from_arrays(predictors, labels)
    hp = Hyperparams(
        r=1, s1=1, s2=2, H=1, lam=0.001, n_starts=2, max_admm_iters=60, max_inner_iters=300, rho_growth=1.01, seed=1
    )
    tf = fit_sign_classifier(data, 0.0, hp)
    assert weighted_01_loss(tf, data, 0.0) < 0.25


def best_constant_risk(data, level):
    shifted = data.responses - level
    weights = np.abs(shifted)
    return min(np.sum(weights[shifted > 0]), np.sum(weights[shifted <= 0])) / data.n


def test_default_level_fit_beats_constant_classifier():
    data, _ = gen_regression(20, 2, 2, 400, seed=0)
    tf = fit_sign_classifier(data, 0.0, Hyperparams(r=2, s1=2, s2=2, n_starts=1, seed=0))
    assert weighted_01_loss(tf, data, 0.0) < 0.75 * best_constant_risk(data, 0.0)


@pytest.mark.bench
def test_default_level_fit_beats_constant_classifier_all_starts():
    data, _ = gen_regression(20, 2, 2, 400, seed=0)
    for level in (-0.5, 0.0, 0.5):
        tf = fit_sign_classifier(data, level, Hyperparams(r=2, s1=2, s2=2, seed=0))
        assert weighted_01_loss(tf, data, level) < 0.75 * best_constant_risk(data, level)


def test_one_by_one_separable_level_has_zero_loss():
    x = np.array([-1.0, -0.5, 0.5, 1.0])
    data = Dataset.from_arrays(x.reshape(4, 1, 1), x)
    tf = fit_sign_classifier(data, 0.0, Hyperparams(r=1, s1=1, s2=1, H=1, seed=0))
    assert tf.coefficient_matrix()[0, 0] > 0.0
    assert weighted_01_loss(tf, data, 0.0) == 0.0


def test_noiseless_rank_one_level_beats_zero_classifier():
    rng = np.random.default_rng(2)
    B = np.zeros((5, 5))
    B[np.ix_([0, 3], [1, 2])] = np.outer([1.0, -1.0], [1.0, 2.0])
    predictors = rng.uniform(size=(200, 5, 5))
    signal = np.einsum("mij,ij->m", predictors, B)
    data = Dataset.from_arrays(predictors, signal - np.median(signal))
    hp = Hyperparams(r=1, s1=2, s2=2, n_starts=2, seed=3)
    tf = fit_sign_classifier(data, 0.0, hp)
    assert weighted_01_loss(tf, data, 0.0) < 0.5 * best_constant_risk(data, 0.0)


def test_entrywise_primal_update_is_exact(rng):
    rows = np.array([0, 0, 1, 1, 1, 2])
    cols = np.array([0, 0, 1, 2, 2, 0])
    values = np.array([0.9, -0.4, 0.2, -1.0, 0.7, -0.3])
    obs = ObservedMatrix.from_triplets(3, 3, rows, cols, values, scale=ResponseScale.identity())
    problem = WeightedProblem.from_observed(obs, 0.1)
    S = rng.standard_normal((3, 3))
    multiplier = rng.standard_normal((3, 3))
    rho, lam = 0.3, 0.05
    mu = rho + lam
    center = (2.0 * rho * S - multiplier) / (2.0 * mu)
    B, b, c = primal_update(problem, 0.1, S, multiplier, rho, lam, LossKind.HINGE)
    assert b == 0.0 and c.shape == (0,)

    grid = np.linspace(-12.0, 12.0, 240_001)
    for i, j in np.ndindex(3, 3):
        here = (rows == i) & (cols == j)
        weights, labels = problem.weights[here], problem.labels[here]

        def objective(z):
            z = np.atleast_1d(z)
            loss = hinge(labels * z[:, np.newaxis]) @ weights
            return loss + mu * (z - center[i, j]) ** 2

        assert objective(B[i, j])[0] <= objective(grid).min() + 1e-12


def test_completion_loss_sums_over_observed_entries():
    obs = ObservedMatrix.from_matrix(np.array([[1.0, -1.0], [0.5, -0.5]]))
    problem = WeightedProblem.from_observed(obs, 0.0)
    phi = np.zeros(4)
    assert problem.margin_risk(phi, LossKind.HINGE) == pytest.approx(np.sum(problem.weights))


@pytest.mark.bench
def test_admm_contract_on_random_fits():
    rng = np.random.default_rng(4)
    for trial in range(100):
        d1, d2 = (int(x) for x in rng.integers(3, 7, size=2))
        s1, s2 = int(rng.integers(1, d1 + 1)), int(rng.integers(1, d2 + 1))
        r = int(rng.integers(1, min(s1, s2) + 1))
        n = int(rng.integers(20, 60))
        data = Dataset.from_arrays(rng.uniform(size=(n, d1, d2)), rng.standard_normal(n))
        level = float(rng.uniform(-0.8, 0.8))
        hp = Hyperparams(
            r=r, s1=s1, s2=s2, n_starts=2, max_admm_iters=40, max_inner_iters=100,
            loss="psi" if trial % 4 == 0 else "hinge", seed=trial,
        )
        tf, report = solve_level(data, level, hp)
        B = tf.coefficient_matrix()
        assert nonzero_rows(B).size <= s1 and nonzero_cols(B).size <= s2
        assert np.linalg.matrix_rank(B, tol=1e-10) <= r
        assert abs(tf.intercept) <= tf.intercept_bound() * (1.0 + 1e-12)
        if report.converged:
            assert report.primal_residual < 1e-3
        again, _ = solve_level(data, level, hp)
        np.testing.assert_array_equal(again.coefficient_matrix(), B)
        assert again.intercept == tf.intercept
