import logging

import numpy as np
import scipy.linalg

from .bounds_curve import BoundsCurve
from .errors import ProjectionError

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
RANK_TOLERANCE = 1e-10


def weighted_least_squares(design, y, weights=None, names=None):
    """Weighted least squares through a QR factorization

    Solves min sum w_i (y_i - b_i' beta)^2 by factorizing sqrt(w) * design.
    A pivoted QR first checks the rank; a deficient design raises
    :class:`ProjectionError` naming the dependent columns.

    :param design: n x k design
    :type design: numpy.ndarray
    :param y: responses
    :type y: numpy.ndarray
    :param weights: non-negative observation weights, all ones when None
    :type weights: numpy.ndarray
    :param names: column labels used in the error message
    :type names: sequence of str
    :returns: coefficients, residuals y - design @ beta, and the triangular factor R with R'R = sum w b b'
    :rtype: tuple
    """
    design = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float)
    root = np.ones(y.shape[0]) if weights is None else np.sqrt(np.asarray(weights, dtype=float))
    scaled = design * root[:, None]
    k = design.shape[1]
    _, r_pivoted, pivots = scipy.linalg.qr(scaled, mode="economic", pivoting=True)
    diagonal = np.abs(np.diag(r_pivoted))
    rank = int(np.sum(diagonal > RANK_TOLERANCE * diagonal[0])) if diagonal.size and diagonal[0] > 0 else 0
    if rank < k or scaled.shape[0] < k:
        labels = names if names is not None else [f"b{j}" for j in range(k)]
        collinear = [labels[int(p)] for p in pivots[rank:]]
        raise ProjectionError(f"singular normal equations: columns {collinear} are linearly dependent")
    q_factor, r_factor = scipy.linalg.qr(scaled, mode="economic")
    beta = scipy.linalg.solve_triangular(r_factor, q_factor.T @ (y * root))
    return beta, y - design @ beta, r_factor


def project(psi, basis_L, basis_U, weights=None):
    """Series projection of the bound pseudo-outcomes

    Runs two separate least-squares regressions, psi_L on the lower-bound
    basis and psi_U on the upper-bound basis, sharing nothing but the data
    (and ``weights``, when given). With constant bases the coefficients are
    the sample means of the scores.

    :param psi: pseudo-outcomes
    :type psi: ScoreVector
    :param basis_L: fitted basis for the lower bound
    :type basis_L: Basis
    :param basis_U: fitted basis for the upper bound
    :type basis_U: Basis
    :param weights: observation weights (multiplier bootstrap), None for ordinary least squares
    :type weights: numpy.ndarray
    :returns: coefficients, residuals and factors of both regressions
    :rtype: BoundsCurve
    :examples: project(scores, build_basis(z, spec_L), build_basis(z, spec_U)).theta(np.linspace(0, 1, 50))
    """
    beta_L, resid_L, r_L = weighted_least_squares(basis_L.design, psi.psi_L, weights)
    beta_U, resid_U, r_U = weighted_least_squares(basis_U.design, psi.psi_U, weights)
    logger.debug("projected scores on k_L=%d, k_U=%d columns", basis_L.k, basis_U.k)
    return BoundsCurve(
        beta_L=beta_L,
        beta_U=beta_U,
        basis_L=basis_L,
        basis_U=basis_U,
        resid_L=resid_L,
        resid_U=resid_U,
        r_L=r_L,
        r_U=r_U,
        weights=None if weights is None else np.asarray(weights, dtype=float),
    )
