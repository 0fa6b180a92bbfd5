import logging

import numpy as np
import scipy.linalg

from .build_basis import build_basis
from .errors import ProjectionError

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
LEVERAGE_LIMIT = 1.0 - 1e-10
TIE_TOLERANCE = 1e-12


def hat_diagonal(design):
    """Leverages h_ii of the least-squares projection onto the columns of ``design``."""
    q_factor, _ = scipy.linalg.qr(design, mode="economic")
    return np.sum(q_factor**2, axis=1)


def loocv_scores(z_values, psi, candidates, kinds=None):
    """Leave-one-out criterion of every candidate basis.

    Returns one dict per candidate with the fitted basis, its dimension and
    the criterion sum((e_i / (1 - h_ii))^2), which is infinite for
    disqualified candidates (fewer rows than columns, or a leverage of one).
    """
    psi = np.asarray(psi, dtype=float)
    n = psi.shape[0]
    results = []
    for spec in candidates:
        basis = build_basis(z_values, spec, kinds)
        design = basis.design
        score = np.inf
        if n >= basis.k:
            leverage = hat_diagonal(design)
            if np.max(leverage) < LEVERAGE_LIMIT:
                beta = np.linalg.lstsq(design, psi, rcond=None)[0]
                residual = psi - design @ beta
                score = float(np.sum((residual / (1.0 - leverage)) ** 2))
        results.append({"spec": spec, "basis": basis, "k": basis.k, "score": score})
        logger.debug("loocv %s: k=%d criterion=%.6g", spec.label, basis.k, score)
    return results


def loocv_select(z_values, psi, candidates, kinds=None):
    """Basis selection by leave-one-out cross-validation

    Computes the closed-form leave-one-out criterion of least squares for
    every candidate and returns the minimizer. Candidates whose criterion is
    within a relative 1e-12 of the minimum count as tied; ties go to the
    smaller dimension, then to the earlier candidate.

    :param z_values: heterogeneity values, shape (n,) or (n, q)
    :type z_values: numpy.ndarray
    :param psi: one bound's pseudo-outcomes
    :type psi: numpy.ndarray
    :param candidates: basis descriptions to compare
    :type candidates: sequence of BasisSpec
    :param kinds: column kinds passed to :func:`build_basis`
    :type kinds: tuple
    :returns: the selected description
    :rtype: BasisSpec
    :examples: loocv_select(z, scores.psi_L, EstimatorSettings().candidates)
    """
    results = loocv_scores(z_values, psi, candidates, kinds)
    finite = [r["score"] for r in results if np.isfinite(r["score"])]
    if not finite:
        raise ProjectionError("every basis candidate was disqualified by leave-one-out cross-validation")
    best = min(finite)
    tied = [
        (r["k"], index) for index, r in enumerate(results)
        if np.isfinite(r["score"]) and r["score"] <= best + TIE_TOLERANCE * abs(best)
    ]
    _, index = min(tied)
    chosen = results[index]["spec"]
    logger.info("selected basis %s (k=%d)", chosen.label, results[index]["k"])
    return chosen
