import numpy as np
import pytest

from hetbounds_python.config import RoyConfig
from hetbounds_python.errors import ConfigurationError, HetBoundsWarning
from hetbounds_python.oracle_bounds import oracle_bounds
from hetbounds_python.simulate import mu1


def test_bounds_bracket_the_effect():
    config = RoyConfig(p=1)
    truth = oracle_bounds(np.array([0.1, 0.5, 0.9]), config, draws=2_000_000, chunk=500_000, seed=1, n_jobs=2)
    assert np.all(truth.theta_L <= truth.theta + 0.005)
    assert np.all(truth.theta <= truth.theta_U + 0.005)
    assert np.all(truth.theta_U - truth.theta_L > 0.01)
    np.testing.assert_allclose(truth.p0, truth.s0 / truth.s1)
    assert np.all(truth.widths == 0.02)


def test_negligible_trimming_collapses_to_the_mean():
    config = RoyConfig(p=1, rho=0.0, gamma1=3.0)
    truth = oracle_bounds(np.array([0.8]), config, draws=2_000_000, seed=2)
    assert truth.theta_L[0] == pytest.approx(mu1(0.8), abs=0.02)
    assert truth.theta_U[0] == pytest.approx(mu1(0.8), abs=0.02)


def test_empty_strata_are_widened():
    with pytest.warns(HetBoundsWarning, match="widening"):
        truth = oracle_bounds(np.array([0.5]), RoyConfig(p=1), draws=20, width=1e-4, seed=3)
    assert truth.widths[0] > 1e-4
    assert truth.counts[0] > 0


def test_frame_columns():
    frame = oracle_bounds(np.array([0.2, 0.4]), RoyConfig(p=1), draws=200_000, seed=4).frame()
    assert list(frame.columns) == ["z", "theta", "theta_L", "theta_U", "s0", "s1", "p0", "count", "width"]
    assert len(frame) == 2


@pytest.mark.parametrize("z", [[-0.1], [1.2]])
def test_points_outside_unit_interval_raise(z):
    with pytest.raises(ConfigurationError):
        oracle_bounds(np.array(z), RoyConfig(p=1), draws=100)
