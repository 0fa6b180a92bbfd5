import numpy as np

from .errors import ScoreError

# CONSTANTS ___________________________________________________________________
NODES = 50


def _integrated(nuisance, arm, lo, hi):
    """Mean of each unit's quantile function over [lo_i, hi_i] by the midpoint rule."""
    n = lo.shape[0]
    fractions = (np.arange(NODES) + 0.5) / NODES
    levels = lo[:, None] + (hi - lo)[:, None] * fractions[None, :]
    rows = np.repeat(np.arange(n), NODES)
    values = nuisance.quantile_at(levels.ravel(), arm=arm, rows=rows)
    return values.reshape(n, NODES).mean(axis=1)


def personal_bounds(nuisance, cells):
    """Plug-in bounds on the always-taker effect at each unit's covariates

    In PLUS cells the selected treated outcome is trimmed to its lower (for
    the lower bound) or upper (for the upper bound) share p0 and compared with
    the selected control mean; in MINUS cells the selected control outcome is
    trimmed to the share 1/p0 and compared with the selected treated mean.
    Trimmed means are integrals of the predicted quantile functions,
    evaluated with a midpoint rule.

    :param nuisance: nuisances with treated and control quantiles
    :type nuisance: NuisanceFit
    :param cells: cell classification
    :type cells: CellClassification
    :returns: lower and upper bound per unit
    :rtype: tuple of numpy.ndarray
    :examples: theta_lower, theta_upper = personal_bounds(nuisance, classify_cells(nuisance))
    """
    if nuisance.q0_grid is None and nuisance.exact_quantile is None:
        raise ScoreError("personalized bounds need selected-control quantiles (set control_quantiles)")
    n = nuisance.n
    p0 = np.asarray(cells.p0, dtype=float)
    plus = cells.plus
    zeros, ones = np.zeros(n), np.ones(n)
    share = np.where(plus, p0, 1.0 / p0)

    treated_mean = _integrated(nuisance, 1, zeros, ones)
    control_mean = _integrated(nuisance, 0, zeros, ones)
    # PLUS: trim treated; MINUS: trim control
    treated_low = _integrated(nuisance, 1, zeros, share)
    treated_high = _integrated(nuisance, 1, 1.0 - share, ones)
    control_low = _integrated(nuisance, 0, zeros, share)
    control_high = _integrated(nuisance, 0, 1.0 - share, ones)

    lower = np.where(plus, treated_low - control_mean, treated_mean - control_high)
    upper = np.where(plus, treated_high - control_mean, treated_mean - control_low)
    return lower, upper
