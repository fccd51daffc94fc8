import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from simplexbundle import AbsoluteContinuityViolation, SupportMismatch
from simplexbundle.estimators import ExponentialChart, FisherScoreTransformer

X_FACE = np.array([[0.2, 0.8, 0.0], [0.5, 0.5, 0.0], [0.9, 0.1, 0.0]])


def test_chart_round_trip_keeps_zeros():
    chart = ExponentialChart().fit(X_FACE)
    S = chart.transform(X_FACE)
    assert np.all(S[:, 2] == 0)
    np.testing.assert_allclose(chart.inverse_transform(S), X_FACE, atol=1e-12)


def test_chart_default_base_is_geometric_mean():
    chart = ExponentialChart().fit(X_FACE)
    g = np.exp(np.log(X_FACE[:, :2]).mean(axis=0))
    np.testing.assert_allclose(chart.base_.weights[:2], g / g.sum())
    # Coordinates are centered at the base, so they average to zero in clr form.
    np.testing.assert_allclose(chart.transform(X_FACE).sum(axis=0)[:2] @ chart.base_.weights[:2],
                               0.0, atol=1e-12)


def test_chart_equals_clr_on_interior_with_uniform_base():
    X = np.array([[0.2, 0.3, 0.5], [0.1, 0.6, 0.3]])
    S = ExponentialChart(base=[1 / 3] * 3).fit(X).transform(X)
    clr = np.log(X) - np.log(X).mean(axis=1, keepdims=True)
    np.testing.assert_allclose(S, clr, atol=1e-12)


def test_chart_rejects_mixed_supports():
    with pytest.raises(SupportMismatch):
        ExponentialChart().fit([[0.5, 0.5, 0.0], [0.2, 0.3, 0.5]])


def test_chart_rejects_unnormalized_rows():
    with pytest.raises(ValueError):
        ExponentialChart().fit([[0.5, 0.6, 0.0]])


def test_estimators_clone_and_params():
    chart = ExponentialChart(tol=1e-6)
    assert clone(chart).get_params()["tol"] == 1e-6
    fst = FisherScoreTransformer(model="gibbs", params={"U": [0, 1], "V": [0, 0]})
    assert clone(fst).get_params()["model"] == "gibbs"


def test_score_transformer_line_model():
    fst = FisherScoreTransformer("line").fit()
    np.testing.assert_allclose(fst.transform([0.25]), [[4.0, 4.0, -4.0]])
    assert list(fst.get_feature_names_out()) == ["s_1", "s_2", "s_3"]


def test_score_transformer_error_policy():
    with pytest.raises(AbsoluteContinuityViolation):
        FisherScoreTransformer("line").fit().transform([[0.5]])
    out = FisherScoreTransformer("line", on_error="nan").fit().transform([[0.25], [0.5]])
    assert np.all(np.isnan(out[1])) and np.all(np.isfinite(out[0]))
    with pytest.raises(ValueError):
        FisherScoreTransformer(on_error="ignore").fit()


def test_pipeline():
    pipe = make_pipeline(FisherScoreTransformer("entropy3"), StandardScaler())
    Z = pipe.fit_transform(np.linspace(0.2, 0.7, 6).reshape(-1, 1))
    assert Z.shape == (6, 3)
