import numpy as np
import pytest

from hetbounds_python.config import LearnerConfig
from hetbounds_python.crossfit import crossfit
from hetbounds_python.errors import ConfigurationError, FoldError
from hetbounds_python.make_folds import FoldAssignment, make_folds
from hetbounds_python.observation_table import ObservationTable

GRID = tuple(np.round(np.arange(1, 20) / 20.0, 2))


def _perturbed(table, rows, shift):
    y = table.y_obs.copy()
    y[rows] = y[rows] + shift
    return ObservationTable(x=table.x, d_treat=table.d_treat, s_select=table.s_select, y_obs=y, propensity=table.propensity)


def test_predictions_do_not_use_own_fold(roy_table):
    folds = make_folds(roy_table.n, 2, 0)
    config = LearnerConfig(grid=GRID)
    base = crossfit(roy_table, folds, config)
    first = folds.indices(1)
    moved = crossfit(_perturbed(roy_table, first, 5.0), folds, config)
    np.testing.assert_array_equal(moved.q1_grid[first], base.q1_grid[first])
    np.testing.assert_array_equal(moved.q0_grid[first], base.q0_grid[first])
    np.testing.assert_array_equal(moved.s1_hat[first], base.s1_hat[first])
    second = folds.indices(2)
    assert not np.array_equal(moved.q1_grid[second], base.q1_grid[second])


def test_predictions_are_clipped_and_monotone(roy_table):
    fit = crossfit(roy_table, make_folds(roy_table.n, 3, 1), LearnerConfig(grid=GRID, clip=0.05))
    for values in (fit.s0_hat, fit.s1_hat):
        assert np.all((values >= 0.05) & (values <= 0.95))
    assert np.all(np.diff(fit.q1_grid, axis=1) >= 0)
    assert np.all(np.diff(fit.q0_grid, axis=1) >= 0)
    assert fit.learner_tag == "logistic+linear_quantile"
    assert [entry["fold"] for entry in fit.diagnostics["folds"]] == [1, 2, 3]


def test_treatment_raises_selection_in_roy_design(roy_table):
    fit = crossfit(roy_table, make_folds(roy_table.n, 2, 2), LearnerConfig(grid=GRID))
    assert np.mean(fit.s1_hat > fit.s0_hat) > 0.9


def test_independent_selection_gives_equal_probabilities():
    rng = np.random.default_rng(8)
    n = 4000
    table = ObservationTable(
        x=rng.uniform(size=(n, 2)),
        d_treat=(rng.uniform(size=n) < 0.5).astype(int),
        s_select=(rng.uniform(size=n) < 0.7).astype(int),
        y_obs=rng.standard_normal(n),
        propensity=np.full(n, 0.5),
    )
    fit = crossfit(table, make_folds(n, 2, 0), LearnerConfig(grid=GRID))
    assert np.mean(np.abs(fit.s1_hat - fit.s0_hat)) < 0.06


def test_without_control_quantiles(roy_table):
    fit = crossfit(roy_table, make_folds(roy_table.n, 2, 0), LearnerConfig(grid=GRID, control_quantiles=False))
    assert fit.q0_grid is None


def test_too_many_folds_raise(roy_table):
    small = roy_table.subset(np.arange(10))
    folds = FoldAssignment(k=6, fold_of=np.arange(10) % 6 + 1, seed=0)
    with pytest.raises(ConfigurationError):
        crossfit(small, folds, LearnerConfig(grid=GRID))


def test_complement_without_selected_treated_names_fold(roy_table):
    treated_selected = (roy_table.d_treat == 1) & (roy_table.s_select == 1)
    control_half = (roy_table.d_treat == 0) & (np.arange(roy_table.n) % 2 == 0)
    fold_of = np.where(treated_selected | control_half, 2, 1)
    folds = FoldAssignment(k=2, fold_of=fold_of, seed=0)
    with pytest.raises(FoldError, match="fold 2"):
        crossfit(roy_table, folds, LearnerConfig(grid=GRID))


def test_forest_learners(roy_table):
    config = LearnerConfig(
        selection_learner="probability_forest", quantile_learner="quantile_forest", trees=30, grid=GRID
    )
    fit = crossfit(roy_table, make_folds(roy_table.n, 2, 0), config)
    assert fit.learner_tag == "probability_forest+quantile_forest"
    assert fit.q1_grid.shape == (roy_table.n, len(GRID))
    assert np.all(np.isfinite(fit.q1_grid))
