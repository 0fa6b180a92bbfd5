import numpy as np
import pytest

from hetbounds_python.errors import HetBoundsWarning
from hetbounds_python.fit_linear_quantile import check_loss, fit_linear_quantile, fit_linear_quantile_grid


def test_intercept_only_median():
    y = np.array([3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0])
    model = fit_linear_quantile(np.empty((7, 0)), y, 0.5)
    assert model.predict(np.empty((1, 0)))[0] == pytest.approx(3.0, abs=1e-6)


def test_noiseless_line_is_recovered():
    rng = np.random.default_rng(3)
    x = rng.uniform(size=(200, 2))
    model = fit_linear_quantile(x, 1.0 + 2.0 * x[:, 0], 0.3)
    assert model.coef == pytest.approx([1.0, 2.0, 0.0], abs=1e-6)


def test_extreme_level_lies_between_order_statistics():
    y = np.random.default_rng(4).standard_normal(100)
    low = np.sort(y)[:2]
    value = fit_linear_quantile(np.empty((100, 0)), y, 0.01).predict(np.empty((1, 0)))[0]
    assert low[0] - 1e-9 <= value <= low[1] + 1e-9


def test_fit_does_not_lose_to_least_squares():
    rng = np.random.default_rng(5)
    x = rng.uniform(size=(300, 1))
    y = x[:, 0] + rng.standard_exponential(300)
    model = fit_linear_quantile(x, y, 0.8)
    features = np.hstack([np.ones((300, 1)), x])
    ols = np.linalg.lstsq(features, y, rcond=None)[0]
    assert check_loss(y - features @ model.coef, 0.8) <= check_loss(y - features @ ols, 0.8)


def test_underdetermined_fit_warns():
    with pytest.warns(HetBoundsWarning):
        model = fit_linear_quantile(np.array([[0.1, 0.2, 0.3], [0.4, 0.5, 0.6]]), np.array([1.0, 2.0]), 0.5)
    assert np.all(np.isfinite(model.coef))


@pytest.mark.parametrize("u", [0.0, 1.0, -0.2])
def test_level_outside_unit_interval(u):
    with pytest.raises(ValueError):
        fit_linear_quantile(np.zeros((5, 1)), np.arange(5.0), u)


def test_grid_predictions_are_monotone():
    rng = np.random.default_rng(6)
    x = rng.uniform(size=(400, 1))
    y = x[:, 0] + (0.2 + x[:, 0]) * rng.standard_normal(400)
    grid = np.arange(1, 20) / 20.0
    predictions = fit_linear_quantile_grid(x, y, grid).predict_grid(rng.uniform(size=(30, 1)))
    assert predictions.shape == (30, 19)
    assert np.all(np.diff(predictions, axis=1) >= 0)
