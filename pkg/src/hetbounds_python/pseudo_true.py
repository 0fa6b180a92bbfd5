from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class PseudoTrue:
    """Variance-weighted centre of the estimated bounds and its standard deviation."""

    theta_star: np.ndarray
    sigma_star: np.ndarray


def pseudo_true(theta_L, theta_U, sigma_L, sigma_U, rho):
    """Pseudo-true parameter

    theta* = (sigma_U theta_L + sigma_L theta_U) / (sigma_L + sigma_U) and
    sigma* = sigma_L sigma_U sqrt(2 (1 + rho)) / (sigma_L + sigma_U). Where
    both standard deviations vanish, theta* is the midpoint and sigma* is 0.
    Inputs broadcast elementwise.

    :param theta_L: lower bound estimate
    :type theta_L: float or numpy.ndarray
    :param theta_U: upper bound estimate
    :type theta_U: float or numpy.ndarray
    :param sigma_L: standard deviation of the lower bound
    :type sigma_L: float or numpy.ndarray
    :param sigma_U: standard deviation of the upper bound
    :type sigma_U: float or numpy.ndarray
    :param rho: correlation of the two estimates
    :type rho: float or numpy.ndarray
    :returns: theta* and sigma*
    :rtype: PseudoTrue
    :examples: pseudo_true(0.0, 3.0, 1.0, 2.0, 0.0).theta_star
    """
    theta_L, theta_U, sigma_L, sigma_U, rho = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (theta_L, theta_U, sigma_L, sigma_U, rho))
    )
    total = sigma_L + sigma_U
    degenerate = total <= 0
    safe = np.where(degenerate, 1.0, total)
    theta_star = np.where(degenerate, 0.5 * (theta_L + theta_U), (sigma_U * theta_L + sigma_L * theta_U) / safe)
    sigma_star = np.where(degenerate, 0.0, sigma_L * sigma_U * np.sqrt(2.0 * (1.0 + rho)) / safe)
    return PseudoTrue(theta_star=theta_star, sigma_star=sigma_star)
