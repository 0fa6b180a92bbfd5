import numpy as np
import pytest

from conftest import make_table
from hetbounds_python.config import EstimatorSettings, InferenceConfig, RoyConfig
from hetbounds_python.errors import HetBoundsWarning
from hetbounds_python.power_study import integrated_theta, run_power_study, stratum_indicator
from hetbounds_python.true_theta import true_theta


def test_integrated_effect_without_selection_on_outcomes():
    config = RoyConfig(rho=0.0)
    assert integrated_theta(0.0, 0.5, config) == pytest.approx(0.0708333 / 0.5, abs=1e-6)


def test_integrated_effect_is_an_average():
    config = RoyConfig()
    value = integrated_theta(0.5, 1.0, config)
    z = np.linspace(0.5, 1.0, 100_001)
    assert value == pytest.approx(np.mean(true_theta(z, config)), abs=1e-5)


def test_stratum_indicator_splits_at_half():
    x = np.array([[0.1], [0.4999], [0.5], [0.9]])
    table = make_table([0, 1, 0, 1], [1, 1, 1, 1], [0.0, 0.0, 0.0, 0.0], x=x)
    np.testing.assert_array_equal(stratum_indicator(table), [0.0, 0.0, 1.0, 1.0])


def test_small_power_table():
    settings = EstimatorSettings(folds=2, inference=InferenceConfig(lattice_step=0.1))
    with pytest.warns(HetBoundsWarning):
        table = run_power_study(RoyConfig(n=800, p=2, seed=3), settings, 2, [-0.5, 0.0, 0.5], nuisance="oracle")
    assert list(table.columns) == ["stratum", "deviation", "theta_bar", "power", "mc_se", "reps_ok"]
    assert len(table) == 6
    assert set(table["stratum"]) == {"z0", "z1"}
    far = table[table["deviation"].abs() == 0.5]
    assert far["power"].eq(1.0).all()


@pytest.mark.slow
def test_power_curves():
    deviations = [-0.5, -0.2, 0.0, 0.2, 0.5]
    table = run_power_study(RoyConfig(n=2000, p=10, seed=4), EstimatorSettings(), 500, deviations, n_jobs=-1)
    at_null = table[table["deviation"] == 0.0]
    assert at_null["power"].max() <= 0.08
    far = table[table["deviation"].abs() == 0.5]
    assert far["power"].min() >= 0.95
    matched = table[table["deviation"] == 0.2].set_index("stratum")["power"]
    assert matched["z1"] >= matched["z0"]
