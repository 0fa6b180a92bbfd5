import logging
from dataclasses import dataclass

import numpy as np

from .errors import emit_warning

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
VARIANCE_FLOOR = 1e-12
RHO_LIMIT = 1.0 - 1e-10


@dataclass(frozen=True, eq=False)
class VarianceField:
    """Asymptotic covariance of (theta_L(z), theta_U(z)) scaled by n, per grid point."""

    omega: np.ndarray
    sigma_L: np.ndarray
    sigma_U: np.ndarray
    rho: np.ndarray
    floored: np.ndarray


def _influence(curve, z, bound):
    """g_i(z) = b(Z_i)' Q^-1 b(z), shape (n, m)."""
    at = np.atleast_2d(curve.basis_at(z, bound))
    return curve.design(bound) @ curve.gram_solve(at.T, bound)


def variance_field(curve, z):
    """Sandwich variance of the projected bounds

    For each point z the covariance is B(z)' Q^-1 [(1/n) sum_i w_i B_i e_i
    e_i' B_i'] Q^-1 B(z) with B = diag(b_L, b_U), Q the weighted Gram
    matrices and e_i the regression residuals; written through the
    influence weights g_i(z) = b(Z_i)' Q^-1 b(z) this is the mean of
    w_i g_i e_i g_i' e_i'. Diagonal entries below 1e-12 are floored with a
    warning and the correlation is clipped into [-1 + 1e-10, 1 - 1e-10].

    :param curve: fitted bound curves
    :type curve: BoundsCurve
    :param z: evaluation points, shape (m,) or (m, q)
    :type z: numpy.ndarray
    :returns: covariance matrices (m x 2 x 2), standard deviations and correlation
    :rtype: VarianceField
    :examples: variance_field(curve, np.linspace(0.1, 0.9, 9)).rho
    """
    weight = np.ones(curve.n) if curve.weights is None else curve.weights
    part_L = _influence(curve, z, "lower") * curve.resid_L[:, None]
    part_U = _influence(curve, z, "upper") * curve.resid_U[:, None]
    omega_LL = np.mean(weight[:, None] * part_L**2, axis=0)
    omega_UU = np.mean(weight[:, None] * part_U**2, axis=0)
    omega_LU = np.mean(weight[:, None] * part_L * part_U, axis=0)

    floored = (omega_LL < VARIANCE_FLOOR) | (omega_UU < VARIANCE_FLOOR)
    if np.any(floored):
        emit_warning(logger, "variance below %.0e at %d of %d points; floored", VARIANCE_FLOOR, int(floored.sum()), floored.size)
    omega_LL = np.maximum(omega_LL, VARIANCE_FLOOR)
    omega_UU = np.maximum(omega_UU, VARIANCE_FLOOR)
    sigma_L = np.sqrt(omega_LL)
    sigma_U = np.sqrt(omega_UU)
    rho = np.clip(omega_LU / (sigma_L * sigma_U), -RHO_LIMIT, RHO_LIMIT)
    omega = np.stack([np.stack([omega_LL, omega_LU], axis=-1), np.stack([omega_LU, omega_UU], axis=-1)], axis=-2)
    return VarianceField(omega=omega, sigma_L=sigma_L, sigma_U=sigma_U, rho=rho, floored=floored)
