from .project import project


def bootstrap_fit(psi, basis_L, basis_U, weights):
    """Weighted refit of both bound regressions with one multiplier vector

    beta_B^b = (sum h_i b_B b_B')^-1 sum h_i b_B psi_B for both bounds with
    the same weights h. Scores are not recomputed; the returned curve carries
    the weights, so its variance field is the bootstrap analogue of the
    sample one.

    :param psi: pseudo-outcomes
    :type psi: ScoreVector
    :param basis_L: lower-bound basis
    :type basis_L: Basis
    :param basis_U: upper-bound basis
    :type basis_U: Basis
    :param weights: multipliers h_i
    :type weights: numpy.ndarray
    :returns: the reweighted fit
    :rtype: BoundsCurve
    :examples: bootstrap_fit(scores, curve.basis_L, curve.basis_U, np.ones(scores.n)).beta_L
    """
    return project(psi, basis_L, basis_U, weights=weights)
