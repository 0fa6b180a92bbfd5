"""Coverage probability of the union event behind the pointwise critical value.

For (u1, u2) standard bivariate normal with correlation rho the event is

    A = {u1 - delta - c <= 0 <= u2 + kappa}   or
    B = {|u1 + u2 - delta| <= sqrt(2 (1 + rho)) z_{1 - alpha/2}}

with kappa = c for the ``"relaxed"`` event and kappa = 0 for ``"literal"``.

The ``"analytic"`` evaluator conditions on s = u1 + u2, which is independent
of u1 - u2: P(B) is a normal band and P(A minus B) a one-dimensional integral
of P(A | s) over s outside the band. The ``"qmc"`` evaluator averages the
event indicator over 2^20 scrambled Sobol points.
"""

from functools import lru_cache

import numpy as np
import scipy.integrate
from scipy.special import ndtr, ndtri
from scipy.stats import qmc

from .errors import SolverError

# CONSTANTS ___________________________________________________________________
QMC_LOG2_POINTS = 20
QMC_SEED = 20240917
TAIL_SDS = 12.0
STEP_LIMIT = 1e-7
QUAD_LIMIT = 200


@lru_cache(maxsize=1)
def _sobol_normals():
    points = qmc.Sobol(d=2, scramble=True, seed=QMC_SEED).random_base2(QMC_LOG2_POINTS)
    points = np.clip(points, 1e-16, 1.0 - 1e-16)
    return ndtri(points)


def _kappa(c, event):
    return c if event == "relaxed" else 0.0


def _radius(rho, alpha):
    return np.sqrt(2.0 * (1.0 + rho)) * ndtri(1.0 - alpha / 2.0)


def _analytic(c, delta, rho, alpha, event):
    kappa = _kappa(c, event)
    sd = np.sqrt(2.0 * (1.0 + rho))
    tau = np.sqrt((1.0 - rho) / 2.0)
    radius = _radius(rho, alpha)
    band_lo, band_hi = delta - radius, delta + radius
    p_b = ndtr(band_hi / sd) - ndtr(band_lo / sd)
    edge = delta + c - kappa
    top = delta + c

    if tau < STEP_LIMIT:
        # u1 = u2: A is the interval [-2 kappa, 2 (delta + c)] in s
        a_lo, a_hi = -2.0 * kappa, 2.0 * top
        p_a = max(ndtr(a_hi / sd) - ndtr(a_lo / sd), 0.0)
        overlap_lo, overlap_hi = max(a_lo, band_lo), min(a_hi, band_hi)
        overlap = max(ndtr(overlap_hi / sd) - ndtr(overlap_lo / sd), 0.0) if overlap_hi > overlap_lo else 0.0
        return p_a, p_b, p_b + p_a - overlap

    def integrand(s):
        bound = s + kappa if s < edge else top
        return np.exp(-0.5 * (s / sd) ** 2) / (sd * np.sqrt(2.0 * np.pi)) * ndtr((bound - 0.5 * s) / tau)

    def integral(lo, hi):
        if hi <= lo:
            return 0.0
        points = [p for p in (edge, -2.0 * kappa, 2.0 * top) if lo < p < hi]
        value, _ = scipy.integrate.quad(integrand, lo, hi, points=points or None, limit=QUAD_LIMIT, epsabs=1e-12, epsrel=1e-10)
        return value

    lo, hi = -TAIL_SDS * sd, TAIL_SDS * sd
    outside = integral(lo, min(band_lo, hi)) + integral(max(band_hi, lo), hi)
    inside = integral(max(band_lo, lo), min(band_hi, hi))
    return outside + inside, p_b, p_b + outside


def _qmc(c, delta, rho, alpha, event):
    normals = _sobol_normals()
    u1 = normals[:, 0]
    u2 = rho * normals[:, 0] + np.sqrt(1.0 - rho**2) * normals[:, 1]
    in_a = (u1 - delta - c <= 0.0) & (0.0 <= u2 + _kappa(c, event))
    in_b = np.abs(u1 + u2 - delta) <= _radius(rho, alpha)
    return float(np.mean(in_a)), float(np.mean(in_b)), float(np.mean(in_a | in_b))


def event_probabilities(c, delta, rho, alpha, event="relaxed", evaluator="analytic"):
    """P(A), P(B) and P(A or B) for the union event (see module docstring)."""
    if not abs(rho) < 1.0:
        raise SolverError(f"correlation must lie strictly inside (-1, 1), got {rho}")
    if delta < 0:
        raise SolverError(f"delta must be non-negative, got {delta}")
    if evaluator == "qmc":
        return _qmc(float(c), float(delta), float(rho), float(alpha), event)
    return _analytic(float(c), float(delta), float(rho), float(alpha), event)


def coverage_prob(c, delta, rho, alpha, event="relaxed", evaluator="analytic"):
    """Probability of the union event at critical value ``c``

    :param c: candidate critical value
    :type c: float
    :param delta: non-negative separation of the bounds in standard-error units
    :type delta: float
    :param rho: correlation of the bound estimates, |rho| < 1
    :type rho: float
    :param alpha: level
    :type alpha: float
    :param event: ``"relaxed"`` or ``"literal"``
    :type event: str
    :param evaluator: ``"analytic"`` or ``"qmc"``
    :type evaluator: str
    :returns: P(A or B)
    :rtype: float
    :examples: coverage_prob(1.645, 10.0, 0.0, 0.05)
    """
    return float(event_probabilities(c, delta, rho, alpha, event, evaluator)[2])
