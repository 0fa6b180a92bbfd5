import logging

import numpy as np
from scipy.special import ndtr, ndtri

from .config import DEFAULT_GRID
from .nuisance_fit import NuisanceFit
from .simulate import mu1

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
X_NODES = 201
LEGENDRE_NODES = 96
ERROR_POINTS = 4001
LEVELS = np.linspace(1e-5, 1.0 - 1e-5, 4001)


def selection_probability(x, d, config):
    """s(d, x) = Phi(x'gamma + d)."""
    x = np.asarray(x, dtype=float)
    return ndtr(x @ config.gamma + d)


def _treated_error_quantiles(config):
    """Quantiles of eps(1) given v <= x1 gamma_1 + 1 on an (x1, level) lattice."""
    nodes, node_weights = np.polynomial.legendre.leggauss(LEGENDRE_NODES)
    fractions = 0.5 * (nodes + 1.0)
    node_weights = 0.5 * node_weights
    x_grid = np.linspace(0.0, 1.0, X_NODES)
    scale = config.sigma1 * np.sqrt(1.0 - config.rho**2)
    errors = np.linspace(-8.0 * config.sigma1, 8.0 * config.sigma1, ERROR_POINTS)
    table = np.empty((X_NODES, LEVELS.size))
    for g, x1 in enumerate(x_grid):
        # v | v <= b as Phi^-1(t Phi(b)) with t uniform on (0, 1)
        v = ndtri(fractions * ndtr(x1 * config.gamma1 + 1.0))
        cdf = ndtr((errors[:, None] - config.rho * config.sigma1 * v[None, :]) / scale) @ node_weights
        cdf = np.maximum.accumulate(cdf)
        table[g] = np.interp(LEVELS, cdf, errors)
    return x_grid, table


def _bilinear(x_grid, table, x1, levels):
    x1 = np.clip(x1, x_grid[0], x_grid[-1])
    levels = np.clip(levels, LEVELS[0], LEVELS[-1])
    gx = np.clip(np.searchsorted(x_grid, x1, side="right") - 1, 0, x_grid.size - 2)
    gu = np.clip(np.searchsorted(LEVELS, levels, side="right") - 1, 0, LEVELS.size - 2)
    wx = (x1 - x_grid[gx]) / (x_grid[gx + 1] - x_grid[gx])
    wu = (levels - LEVELS[gu]) / (LEVELS[gu + 1] - LEVELS[gu])
    low = (1.0 - wu) * table[gx, gu] + wu * table[gx, gu + 1]
    high = (1.0 - wu) * table[gx + 1, gu] + wu * table[gx + 1, gu + 1]
    return (1.0 - wx) * low + wx * high


def true_nuisance(table, config, grid=DEFAULT_GRID, clip=0.01):
    """Analytic nuisances of the Roy model for the units of ``table``

    Selection probabilities are Phi(x'gamma + d). The selected control
    outcome is eps(0), independent of selection, so its quantiles are
    sigma0 Phi^-1(u). The selected treated outcome is mu1(x1) plus eps(1)
    given v <= x1 gamma_1 + 1; its distribution function
    E[Phi((y - rho sigma1 v) / (sigma1 sqrt(1 - rho^2))) | v <= b] is
    computed by Gauss-Legendre quadrature on a lattice in x1 and inverted
    numerically. The fit carries an exact quantile function, so trimming
    levels off the grid are evaluated without grid interpolation.

    :param table: sample, typically from :func:`simulate`
    :type table: ObservationTable
    :param config: design that generated the sample
    :type config: RoyConfig
    :param grid: quantile grid for the tabulated predictions
    :type grid: tuple
    :param clip: selection probabilities are clipped into [clip, 1 - clip]
    :type clip: float
    :returns: true nuisances
    :rtype: NuisanceFit
    :examples: true_nuisance(simulate(RoyConfig()), RoyConfig()).s1_hat
    """
    x1 = table.x[:, 0]
    x_grid, error_table = _treated_error_quantiles(config)
    shift = mu1(x1)

    def exact_quantile(arm, levels, rows):
        levels = np.asarray(levels, dtype=float)
        rows = np.asarray(rows)
        if arm == 0:
            return config.sigma0 * ndtri(np.clip(levels, 1e-12, 1.0 - 1e-12))
        return shift[rows] + _bilinear(x_grid, error_table, x1[rows], levels)

    grid = np.asarray(grid, dtype=float)
    n = table.n
    rows = np.repeat(np.arange(n), grid.size)
    levels = np.tile(grid, n)
    q1_grid = exact_quantile(1, levels, rows).reshape(n, grid.size)
    q0_grid = exact_quantile(0, levels, rows).reshape(n, grid.size)
    s0 = np.clip(selection_probability(table.x, 0.0, config), clip, 1.0 - clip)
    s1 = np.clip(selection_probability(table.x, 1.0, config), clip, 1.0 - clip)
    logger.debug("true nuisances evaluated for %d units", n)
    return NuisanceFit(
        s0_hat=s0,
        s1_hat=s1,
        grid=grid,
        q1_grid=q1_grid,
        q0_grid=q0_grid,
        learner_tag="oracle",
        exact_quantile=exact_quantile,
        diagnostics={"learner": "oracle"},
    )
