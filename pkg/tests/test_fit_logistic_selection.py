import warnings

import numpy as np
import pytest

from hetbounds_python.errors import FoldError
from hetbounds_python.fit_logistic_selection import fit_logistic_selection


def test_arm_frequencies_without_covariates():
    rng = np.random.default_rng(0)
    d = (rng.uniform(size=4000) < 0.5).astype(int)
    s = np.where(d == 1, rng.uniform(size=4000) < 0.8, rng.uniform(size=4000) < 0.3).astype(int)
    model = fit_logistic_selection(np.empty((4000, 0)), d, s)
    assert model.converged
    x = np.empty((3, 0))
    assert model.predict(x, 1) == pytest.approx(np.full(3, s[d == 1].mean()), abs=1e-4)
    assert model.predict(x, 0) == pytest.approx(np.full(3, s[d == 0].mean()), abs=1e-4)


def test_independent_selection_is_flat():
    rng = np.random.default_rng(1)
    x = rng.uniform(size=(8000, 2))
    d = (rng.uniform(size=8000) < 0.5).astype(int)
    s = (rng.uniform(size=8000) < 0.6).astype(int)
    model = fit_logistic_selection(x, d, s)
    grid = rng.uniform(size=(50, 2))
    for arm in (0, 1):
        assert np.all(np.abs(model.predict(grid, arm) - 0.6) < 0.07)


def test_selection_rising_in_covariate():
    rng = np.random.default_rng(2)
    x = rng.uniform(size=(6000, 1))
    d = (rng.uniform(size=6000) < 0.5).astype(int)
    s = (rng.uniform(size=6000) < 1.0 / (1.0 + np.exp(-(-1.0 + 2.0 * x[:, 0] + d)))).astype(int)
    model = fit_logistic_selection(x, d, s)
    low, high = model.predict(np.array([[0.1], [0.9]]), 1)
    assert high > low
    assert model.predict(np.array([[0.5]]), 1)[0] == pytest.approx(1.0 / (1.0 + np.exp(-1.0)), abs=0.05)


def test_all_selected_is_clipped():
    d = np.tile([0, 1], 50)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = fit_logistic_selection(np.linspace(0, 1, 100)[:, None], d, np.ones(100), clip=0.01)
    assert model.predict(np.array([[0.5]]), 1)[0] == pytest.approx(0.99)
    assert model.predict(np.array([[0.5]]), 0)[0] == pytest.approx(0.99)


def test_single_arm_raises():
    with pytest.raises(FoldError):
        fit_logistic_selection(np.zeros((10, 1)), np.ones(10), np.ones(10))


def test_describe_reports_fit():
    d = np.tile([0, 1], 20)
    s = np.tile([0, 1, 1, 0], 10)
    description = fit_logistic_selection(np.empty((40, 0)), d, s).describe()
    assert description["learner"] == "logistic"
    assert len(description["coef"]) == 2
