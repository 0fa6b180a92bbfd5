import numpy as np
import pytest
from scipy.special import ndtri

from hetbounds_python.config import DEFAULT_GRID, RoyConfig
from hetbounds_python.nuisance_fit import NuisanceFit
from hetbounds_python.observation_table import ObservationTable
from hetbounds_python.simulate import simulate
from hetbounds_python.true_nuisance import true_nuisance


@pytest.fixture
def roy_config():
    return RoyConfig(n=1200, p=2, seed=11)


@pytest.fixture
def roy_table(roy_config):
    return simulate(roy_config)


@pytest.fixture(scope="session")
def oracle_sample():
    """A large Roy sample with its analytic nuisances."""
    config = RoyConfig(n=20000, p=2, seed=2024)
    table = simulate(config)
    return config, table, true_nuisance(table, config)


def make_table(d, s, y, propensity=0.5, x=None):
    d = np.asarray(d)
    n = d.shape[0]
    x = np.zeros((n, 1)) if x is None else x
    return ObservationTable(
        x=x,
        d_treat=d,
        s_select=s,
        y_obs=y,
        propensity=np.broadcast_to(np.asarray(propensity, dtype=float), (n,)).copy(),
    )


def constant_nuisance(n, s0, s1, treated_quantile, control_quantile=None, grid=DEFAULT_GRID):
    """Nuisances equal for every unit, with exact quantile functions of the level."""
    grid = np.asarray(grid, dtype=float)

    def exact(arm, levels, rows):
        levels = np.asarray(levels, dtype=float)
        if arm == 1:
            return np.asarray(treated_quantile(levels), dtype=float)
        return np.asarray(control_quantile(levels), dtype=float)

    q1 = np.tile(treated_quantile(grid), (n, 1))
    q0 = None if control_quantile is None else np.tile(control_quantile(grid), (n, 1))
    return NuisanceFit(
        s0_hat=np.full(n, float(s0)),
        s1_hat=np.full(n, float(s1)),
        grid=grid,
        q1_grid=q1,
        q0_grid=q0,
        learner_tag="fixed",
        exact_quantile=exact if control_quantile is not None else None,
    )


@pytest.fixture(scope="session")
def shifted_normal_sample():
    """Independent selection with S(1) share 0.8, S(0) share 0.5, Y(1) ~ N(2, 1), Y(0) ~ N(0, 1).

    Returns the sample and its exact nuisances (p0 = 0.625 everywhere).
    """
    rng = np.random.default_rng(77)
    n = 40000
    d = (rng.uniform(size=n) < 0.5).astype(int)
    s = np.where(d == 1, rng.uniform(size=n) < 0.8, rng.uniform(size=n) < 0.5).astype(int)
    y = np.where(d == 1, 2.0 + rng.standard_normal(n), rng.standard_normal(n))
    table = make_table(d, s, np.where(s == 1, y, 0.0), x=rng.uniform(size=(n, 1)))
    nuisance = constant_nuisance(n, 0.5, 0.8, lambda u: 2.0 + ndtri(u), lambda u: ndtri(u))
    return table, nuisance
