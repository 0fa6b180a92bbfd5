from dataclasses import dataclass

import numpy as np

from .variance_field import variance_field


@dataclass(frozen=True, eq=False)
class BandResult:
    """Uniform band on a grid; points with degenerate variance carry NaN and ``valid`` False."""

    z: np.ndarray
    band_lo: np.ndarray
    band_hi: np.ndarray
    valid: np.ndarray
    c_lower: float
    c_upper: float


def confidence_band(curve, bootstrap, alpha, z_grid):
    """Uniform confidence band from the multiplier bootstrap

    band_lo(z) = theta_L(z) + c_{alpha/2}(inf t_L) sigma_L(z) / sqrt(n) and
    band_hi(z) = theta_U(z) + c_{1-alpha/2}(sup t_U) sigma_U(z) / sqrt(n).
    The lower quantile of the infimum is negative, so the lower endpoint
    lies below the estimated lower bound.

    :param curve: sample fit
    :type curve: BoundsCurve
    :param bootstrap: bootstrap replications
    :type bootstrap: BootstrapRun
    :param alpha: level
    :type alpha: float
    :param z_grid: points at which the band is reported
    :type z_grid: numpy.ndarray
    :returns: band endpoints
    :rtype: BandResult
    :examples: confidence_band(curve, run_bootstrap(scores, curve, z, 1000), 0.10, z).band_lo
    """
    z_grid = np.asarray(z_grid, dtype=float)
    c_lower, c_upper = bootstrap.quantiles(alpha)
    theta_L, theta_U = curve.theta(z_grid)
    field = variance_field(curve, z_grid)
    root_n = np.sqrt(curve.n)
    valid = ~field.floored
    band_lo = np.where(valid, theta_L + c_lower * field.sigma_L / root_n, np.nan)
    band_hi = np.where(valid, theta_U + c_upper * field.sigma_U / root_n, np.nan)
    return BandResult(z=z_grid, band_lo=band_lo, band_hi=band_hi, valid=valid, c_lower=c_lower, c_upper=c_upper)
