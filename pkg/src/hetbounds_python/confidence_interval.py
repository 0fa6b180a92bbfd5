import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .config import InferenceConfig
from .critical_value import critical_value
from .pseudo_true import pseudo_true

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class IntervalResult:
    """Pointwise intervals with the quantities that produced them, one entry per point."""

    ci_lo: np.ndarray
    ci_hi: np.ndarray
    theta_star: np.ndarray
    sigma_star: np.ndarray
    c_hat: np.ndarray
    rho: np.ndarray


def confidence_interval(theta_L, theta_U, sigma_L, sigma_U, rho, n, alpha, inference=None, cache=None):
    """Misspecification-robust pointwise confidence interval

    Joins [theta_L - sigma_L c / sqrt(n), theta_U + sigma_U c / sqrt(n)]
    with the pseudo-true interval theta* +- sigma* z_{1-alpha/2} / sqrt(n)
    and returns the smallest interval containing both. The second interval
    keeps the result non-empty when the estimated bounds cross. Inputs may be
    scalars or arrays over grid points; c comes from :func:`critical_value`
    at each point's correlation.

    :param theta_L: lower bound estimate
    :type theta_L: float or numpy.ndarray
    :param theta_U: upper bound estimate
    :type theta_U: float or numpy.ndarray
    :param sigma_L: standard deviation of the lower bound (root-n scale)
    :type sigma_L: float or numpy.ndarray
    :param sigma_U: standard deviation of the upper bound (root-n scale)
    :type sigma_U: float or numpy.ndarray
    :param rho: correlation of the bound estimates
    :type rho: float or numpy.ndarray
    :param n: sample size
    :type n: int
    :param alpha: level
    :type alpha: float
    :param inference: solver settings
    :type inference: InferenceConfig
    :param cache: critical-value lattice cache
    :type cache: CriticalValueCache
    :returns: interval endpoints and ingredients
    :rtype: IntervalResult
    :examples: confidence_interval(-0.156, -0.016, 0.9, 0.9, 0.5, 2000, 0.10).ci_lo
    """
    inference = InferenceConfig() if inference is None else inference
    theta_L, theta_U, sigma_L, sigma_U, rho = (
        np.atleast_1d(np.asarray(v, dtype=float)) for v in np.broadcast_arrays(theta_L, theta_U, sigma_L, sigma_U, rho)
    )
    star = pseudo_true(theta_L, theta_U, sigma_L, sigma_U, rho)
    c_hat = np.array([
        critical_value(
            r, alpha,
            event=inference.event,
            evaluator=inference.evaluator,
            memoize=inference.memoize,
            lattice_step=inference.lattice_step,
            cache=cache,
        ).c_hat
        for r in rho
    ])
    root_n = np.sqrt(n)
    z_two = ndtri(1.0 - alpha / 2.0)
    ci_lo = np.minimum(theta_L - sigma_L * c_hat / root_n, star.theta_star - star.sigma_star * z_two / root_n)
    ci_hi = np.maximum(theta_U + sigma_U * c_hat / root_n, star.theta_star + star.sigma_star * z_two / root_n)
    return IntervalResult(
        ci_lo=ci_lo, ci_hi=ci_hi, theta_star=star.theta_star, sigma_star=star.sigma_star, c_hat=c_hat, rho=rho
    )
