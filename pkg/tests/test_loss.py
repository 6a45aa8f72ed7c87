import numpy as np
import pytest

from assist.constants import LossKind
from assist.entities import TraceFunction
from assist.exceptions import ValidationException
from assist.loss import (
    hinge,
    margin_loss,
    psi,
    sgn,
    weighted_01_loss,
    weighted_01_risk,
    weighted_margin_objective,
    weighted_margin_risk,
)


def constant_classifier(b, d=2):
    return TraceFunction(u=np.zeros((d, 1)), v=np.zeros((d, 1)), intercept=b)


def test_sign_of_zero_is_negative():
    assert sgn(0) == -1
    assert sgn(0.0) == -1
    assert sgn(1e-300) == 1
    np.testing.assert_array_equal(sgn(np.array([-2.0, 0.0, 3.0])), [-1.0, -1.0, 1.0])


@pytest.mark.parametrize(
    "kind, z, expected",
    [
        ("hinge", 0.5, 0.5),
        ("hinge", 2.0, 0.0),
        ("hinge", -1.0, 2.0),
        ("psi", 0.5, 1.0),
        ("psi", -3.0, 2.0),
        ("psi", 2.0, 0.0),
    ],
)
def test_margin_loss_values(kind, z, expected):
    value = margin_loss(kind, z)
    assert isinstance(value, float)
    assert value == pytest.approx(expected)


def test_margin_loss_vectorized():
    z = np.linspace(-2.0, 2.0, 9)
    np.testing.assert_allclose(margin_loss(LossKind.HINGE, z), hinge(z))
    np.testing.assert_allclose(margin_loss(LossKind.PSI, z), psi(z))


def test_margin_loss_rejects_zero_one_and_unknown():
    with pytest.raises(ValidationException):
        margin_loss("zero-one", 0.0)
    with pytest.raises(ValidationException):
        margin_loss("logistic", 0.0)
    with pytest.raises(ValidationException):
        margin_loss("hinge", np.inf)


def test_psi_is_bounded_by_twice_hinge():
    z = np.linspace(-5.0, 5.0, 101)
    assert np.all(psi(z) <= 2.0 * hinge(z) + 1e-12)
    assert np.all(psi(z) <= 2.0)


def test_psi_splits_into_difference_of_convex_parts():
    z = np.concatenate([np.linspace(-5.0, 5.0, 1001), [-1.0, 0.0, 1.0]])
    np.testing.assert_allclose(psi(z), 2.0 * hinge(z) - 2.0 * np.maximum(-z, 0.0), atol=1e-12)


def test_weighted_01_loss_constant_classifier(unit_dataset):
    # phi = 0.5 everywhere predicts +1; only samples with y <= 0 are penalized.
    loss = weighted_01_loss(constant_classifier(0.5), unit_dataset, 0.0)
    assert loss == pytest.approx((1.0 + 0.5) / 4.0)


def test_weighted_01_loss_at_top_level(unit_dataset):
    # At pi = 1 every label is -1, so a negative classifier is perfect.
    assert weighted_01_loss(constant_classifier(-0.5), unit_dataset, 1.0) == 0.0


def test_weighted_margin_objective_hinge(unit_dataset):
    objective = weighted_margin_objective(constant_classifier(0.5), unit_dataset, 0.0, "hinge", lam=0.3)
    # margins 0.5 * sgn(y): hinge 1.5 for y < 0, 0.5 for y > 0
    expected = (1.0 * 1.5 + 0.5 * 1.5 + 0.5 * 0.5 + 1.0 * 0.5) / 4.0
    assert objective == pytest.approx(expected)


def test_weighted_margin_objective_adds_ridge(unit_dataset):
    tf = TraceFunction(u=np.array([[1.0], [0.0]]), v=np.array([[2.0], [0.0]]))
    plain = weighted_margin_objective(tf, unit_dataset, 0.0, "psi", lam=0.0)
    ridged = weighted_margin_objective(tf, unit_dataset, 0.0, "psi", lam=0.1)
    assert ridged - plain == pytest.approx(0.1 * 4.0)


def test_objective_rejects_negative_lambda(unit_dataset):
    with pytest.raises(ValidationException):
        weighted_margin_objective(constant_classifier(0.0), unit_dataset, 0.0, "hinge", lam=-0.1)


def test_dimension_mismatch(unit_dataset):
    with pytest.raises(ValidationException):
        weighted_01_loss(constant_classifier(0.0, d=3), unit_dataset, 0.0)


def test_margin_risks_dominate_weighted_01_risk(rng):
    responses = rng.uniform(-1.0, 1.0, size=200)
    scores = rng.standard_normal(200)
    for level in (-0.5, 0.0, 0.3):
        base = weighted_01_risk(scores, responses, level)
        assert weighted_margin_risk(scores, responses, level, LossKind.HINGE) >= base - 1e-12
        assert weighted_margin_risk(scores, responses, level, LossKind.PSI) >= base - 1e-12


def test_weighted_01_risk_ignores_score_magnitude(rng):
    responses = rng.uniform(-1.0, 1.0, size=50)
    scores = rng.standard_normal(50)
    assert weighted_01_risk(scores, responses, 0.2) == weighted_01_risk(7.5 * scores, responses, 0.2)
