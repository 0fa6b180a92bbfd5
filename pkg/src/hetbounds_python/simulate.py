"""Generalized Roy model with treatment-dependent selection.

    S(d) = 1{X'gamma + d - v >= 0}
    Y(0) = eps(0),  Y(1) = mu1(X_1) + eps(1)
    D ~ Bernoulli(treat_prob),  X_j ~ uniform(0, 1)
    (eps(1), eps(0), v) normal, cov(eps(1), v) = rho * sigma1, other covariances 0.

Since S(1) >= S(0) for every unit, treatment raises selection everywhere.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .observation_table import ObservationTable

logger = logging.getLogger(__name__)


def mu1(x):
    """Treated mean outcome 0.35 - 4 x^2 + 4 x^3."""
    x = np.asarray(x, dtype=float)
    return 0.35 - 4.0 * x**2 + 4.0 * x**3


@dataclass(frozen=True, eq=False)
class RoyDraw:
    """Latent quantities of one simulated sample."""

    x: np.ndarray
    d: np.ndarray
    v: np.ndarray
    eps1: np.ndarray
    eps0: np.ndarray
    s1: np.ndarray
    s0: np.ndarray
    y1: np.ndarray
    y0: np.ndarray

    @property
    def s(self):
        return np.where(self.d == 1, self.s1, self.s0)

    @property
    def y(self):
        return np.where(self.d == 1, self.y1, self.y0)


def draw_errors(rng, size, config):
    """(eps(1), eps(0), v) with the model's covariance."""
    v = rng.standard_normal(size)
    w1 = rng.standard_normal(size)
    w0 = rng.standard_normal(size)
    eps1 = config.rho * config.sigma1 * v + config.sigma1 * np.sqrt(1.0 - config.rho**2) * w1
    return eps1, config.sigma0 * w0, v


def simulate_latent(config):
    """Draw a sample with its potential selections and outcomes.

    :param config: design
    :type config: RoyConfig
    :returns: latent draw
    :rtype: RoyDraw
    :examples: draw = simulate_latent(RoyConfig(n=1000)); bool(np.all(draw.s1 >= draw.s0))
    """
    rng = np.random.default_rng(config.seed)
    x = rng.uniform(size=(config.n, config.p))
    d = (rng.uniform(size=config.n) < config.treat_prob).astype(np.int8)
    eps1, eps0, v = draw_errors(rng, config.n, config)
    index = x @ config.gamma
    s1 = (index + 1.0 - v >= 0).astype(np.int8)
    s0 = (index - v >= 0).astype(np.int8)
    return RoyDraw(x=x, d=d, v=v, eps1=eps1, eps0=eps0, s1=s1, s0=s0, y1=mu1(x[:, 0]) + eps1, y0=eps0)


def simulate(config):
    """Observed sample of the generalized Roy model

    Draws covariates, treatment and latent errors, then keeps only what an
    analyst sees: the outcome is recorded for selected units and zero
    otherwise. The propensity is the known design probability.

    :param config: design
    :type config: RoyConfig
    :returns: the sample
    :rtype: ObservationTable
    :examples: simulate(RoyConfig(n=2000, seed=3)).n
    """
    draw = simulate_latent(config)
    s = draw.s
    table = ObservationTable(
        x=draw.x,
        d_treat=draw.d,
        s_select=s,
        y_obs=np.where(s == 1, draw.y, 0.0),
        propensity=np.full(config.n, config.treat_prob),
    )
    logger.debug("simulated %d units, %d selected", config.n, int(s.sum()))
    return table
