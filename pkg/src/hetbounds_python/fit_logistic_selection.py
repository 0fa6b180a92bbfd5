import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import expit

from .errors import FoldError, emit_warning

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
CONVERGENCE = 1e-10
MAX_ITER = 100
STALL_WINDOW = 5
FALLBACK_FACTOR = 1e4
ARMIJO = 1e-4


@dataclass(frozen=True, eq=False)
class LogisticSelection:
    """Ridge logistic model of P(S=1 | D=d, X=x) on features [1, x, d, d*x]."""

    coef: np.ndarray
    center: np.ndarray
    scale: np.ndarray
    ridge: float
    converged: bool
    iterations: int
    clip: float

    def features(self, x, d):
        x = (np.asarray(x, dtype=float) - self.center) / self.scale
        d = np.broadcast_to(np.asarray(d, dtype=float), (x.shape[0],))[:, None]
        return np.hstack([np.ones((x.shape[0], 1)), x, d, d * x])

    def predict(self, x, d):
        """Clipped selection probabilities for treatment status ``d`` (scalar or vector)."""
        probability = expit(self.features(x, d) @ self.coef)
        return np.clip(probability, self.clip, 1.0 - self.clip)

    def describe(self):
        return {
            "learner": "logistic",
            "coef": [float(b) for b in self.coef],
            "ridge": self.ridge,
            "converged": self.converged,
            "iterations": self.iterations,
        }


def _objective(features, s, beta, ridge):
    eta = features @ beta
    return float(np.mean(np.logaddexp(0.0, eta) - s * eta) + 0.5 * ridge * beta @ beta)


def _newton(features, s, ridge):
    n, p = features.shape
    share = np.clip(np.mean(s), 1e-3, 1.0 - 1e-3)
    beta = np.zeros(p)
    beta[0] = np.log(share / (1.0 - share))

    # VARIABLES ___________________________________________________________________
    converged = False
    stalled = False
    iteration = 0
    norms = []

    while not converged:
        iteration = iteration + 1
        probability = expit(features @ beta)
        gradient = features.T @ (probability - s) / n + ridge * beta
        weight = probability * (1.0 - probability)
        hessian = features.T @ (features * weight[:, None]) / n + ridge * np.eye(p)
        try:
            step = scipy.linalg.solve(hessian, gradient, assume_a="pos")
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
            step = np.linalg.lstsq(hessian, gradient, rcond=None)[0]

        # damped step: halve until the penalized likelihood decreases enough
        current = _objective(features, s, beta, ridge)
        decrement = float(gradient @ step)
        length = 1.0
        while length > 1e-10 and _objective(features, s, beta - length * step, ridge) > current - ARMIJO * length * decrement:
            length = 0.5 * length
        beta = beta - length * step

        norms.append(float(np.max(np.abs(gradient))))
        if 0.5 * decrement < CONVERGENCE:
            converged = True
        elif len(norms) > STALL_WINDOW and norms[-1] >= norms[-1 - STALL_WINDOW]:
            stalled = True

        if converged or stalled or (iteration == MAX_ITER):
            break

    return beta, converged, iteration


def fit_logistic_selection(x, d, s, ridge_scale=1e-6, clip=0.01):
    """Logistic selection model with treatment interactions

    Fits P(S=1 | D, X) = logistic(b'[1, x, d, d*x]) by ridge-penalized maximum
    likelihood with damped Newton steps. Covariates are standardized
    internally. When the gradient norm stops decreasing (quasi-separation) or
    the iteration budget is exhausted, the model is refit with a penalty
    ``FALLBACK_FACTOR`` times larger and a warning is emitted.

    :param x: covariates, shape (n, p); p may be 0
    :type x: numpy.ndarray
    :param d: treatment indicators
    :type d: numpy.ndarray
    :param s: selection indicators
    :type s: numpy.ndarray
    :param ridge_scale: penalty per observation (penalty = ridge_scale * n on the summed likelihood)
    :type ridge_scale: float
    :param clip: predictions are clipped into [clip, 1 - clip]
    :type clip: float
    :returns: fitted predictor
    :rtype: LogisticSelection
    :examples: fit_logistic_selection(x, d, s).predict(x, 1)
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    d = np.asarray(d, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.unique(d).size < 2:
        raise FoldError("logistic selection model needs both treatment arms in the training data")

    center = x.mean(axis=0) if x.shape[1] else np.zeros(0)
    scale = x.std(axis=0) if x.shape[1] else np.ones(0)
    scale = np.where(scale > 0, scale, 1.0)
    template = LogisticSelection(
        coef=np.zeros(0), center=center, scale=scale, ridge=ridge_scale, converged=False, iterations=0, clip=clip
    )
    features = template.features(x, d)

    ridge = max(ridge_scale, 1e-12)
    beta, converged, iteration = _newton(features, s, ridge)
    if not converged:
        emit_warning(
            logger,
            "logistic selection model did not converge in %d iterations (possible separation); "
            "refitting with penalty %.1e",
            iteration, ridge * FALLBACK_FACTOR,
        )
        ridge = ridge * FALLBACK_FACTOR
        beta, converged, iteration = _newton(features, s, ridge)

    logger.debug("logistic selection fitted: %d iterations, converged=%s", iteration, converged)
    return LogisticSelection(
        coef=beta, center=center, scale=scale, ridge=ridge, converged=converged, iterations=iteration, clip=clip
    )
