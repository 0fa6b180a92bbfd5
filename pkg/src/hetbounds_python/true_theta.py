import numpy as np
from scipy.special import ndtr

from .simulate import mu1


def true_theta(z, config):
    """Always-taker effect of the Roy model at X_1 = z

    Always-takers are the units with v <= z gamma_1, so the effect is mu1(z)
    plus the truncated-normal mean of eps(1), whose covariance with v is
    rho * sigma1: theta(z) = mu1(z) - rho sigma1 phi(z gamma_1) / Phi(z gamma_1).

    :param z: value(s) of the first covariate in [0, 1]
    :type z: float or numpy.ndarray
    :param config: design
    :type config: RoyConfig
    :returns: theta(z)
    :rtype: float or numpy.ndarray
    :examples: true_theta(0.0, RoyConfig())
    """
    a = np.asarray(z, dtype=float) * config.gamma1
    density = np.exp(-0.5 * a**2) / np.sqrt(2.0 * np.pi)
    return mu1(z) - config.rho * config.sigma1 * density / ndtr(a)
