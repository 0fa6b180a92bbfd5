import logging
import threading
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from scipy.special import ndtri

from .coverage_prob import coverage_prob
from .errors import SolverError

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
CONVERGENCE = 1e-3
MAX_ITER = 60
DELTA_POINTS = 64
GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
GOLDEN_TOLERANCE = 1e-6
PROBABILITY_SLACK = 1e-4
RHO_LIMIT = 1.0 - 1e-10


@dataclass(frozen=True)
class CriticalValue:
    """Solution of the coverage equation with solver diagnostics."""

    c_hat: float
    alpha: float
    rho: float
    iterations: int
    tolerance: float
    argmin_delta: float


def _golden_min(func, lo, hi, tol):
    """Minimum of a unimodal ``func`` on [lo, hi] by golden-section search."""
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = func(x1), func(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = func(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = func(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def worst_case(c, rho, alpha, event="relaxed", evaluator="analytic"):
    """inf over delta >= 0 of the coverage probability, with the minimizing delta.

    The infimum is sought on [0, delta_max] with delta_max = 2 (z_{1-alpha/2}
    + c) (1 + sqrt(2 (1 + rho))): a 64-point grid locates the minimum and a
    golden-section search refines it between the neighbouring grid points.
    """
    z_hi = ndtri(1.0 - alpha / 2.0)
    delta_max = 2.0 * (z_hi + c) * (1.0 + np.sqrt(2.0 * (1.0 + rho)))
    grid = np.linspace(0.0, delta_max, DELTA_POINTS)
    values = np.array([coverage_prob(c, delta, rho, alpha, event, evaluator) for delta in grid])
    j = int(np.argmin(values))
    lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, DELTA_POINTS - 1)]
    delta, value = _golden_min(
        lambda d: coverage_prob(c, d, rho, alpha, event, evaluator), lo, hi, GOLDEN_TOLERANCE * delta_max
    )
    if values[j] < value:
        delta, value = grid[j], values[j]
    return float(value), float(delta)


def _solve(rho, alpha, event, evaluator, delta):
    target = 1.0 - alpha
    z_lo = float(ndtri(1.0 - alpha))
    z_hi = float(ndtri(1.0 - alpha / 2.0))

    def coverage(c):
        if delta is not None:
            return coverage_prob(c, delta, rho, alpha, event, evaluator), delta
        return worst_case(c, rho, alpha, event, evaluator)

    top, top_delta = coverage(z_hi)
    if top < target - PROBABILITY_SLACK:
        raise SolverError(
            f"coverage equation has no root in [{z_lo:.4f}, {z_hi:.4f}] at rho={rho:.6g}, alpha={alpha}: "
            f"coverage {top:.6f} < {target} at the upper end (event={event}, evaluator={evaluator}, "
            f"argmin delta={top_delta:.4f})"
        )
    bottom, bottom_delta = coverage(z_lo)
    if bottom >= target:
        return CriticalValue(z_lo, alpha, rho, 0, 0.0, bottom_delta)

    # VARIABLES ___________________________________________________________________
    lo, hi = z_lo, z_hi
    argmin = top_delta
    converged = False
    iteration = 0

    while not converged:
        iteration = iteration + 1
        mid = 0.5 * (lo + hi)
        value, mid_delta = coverage(mid)
        if value >= target:
            hi, argmin = mid, mid_delta
        else:
            lo = mid

        if hi - lo < CONVERGENCE:
            converged = True

        if converged or (iteration == MAX_ITER):
            break

    return CriticalValue(hi, alpha, rho, iteration, hi - lo, argmin)


class CriticalValueCache:
    """Critical values on a lattice in rho, shared between threads.

    Lattice nodes are -1 + j * step, with the end nodes moved inside to
    +-(1 - 1e-10). Entries are written once and then only read.
    """

    def __init__(self, step=0.01):
        self.step = step
        self.size = int(round(2.0 / step))
        self._values = {}
        self._lock = threading.Lock()

    def node(self, j):
        return float(np.clip(-1.0 + j * self.step, -RHO_LIMIT, RHO_LIMIT))

    def bracket(self, rho):
        j = int(np.floor((rho + 1.0) / self.step))
        return min(max(j, 0), self.size - 1)

    def get(self, j, alpha, event, evaluator):
        key = (j, float(alpha), event, evaluator)
        with self._lock:
            found = self._values.get(key)
        if found is None:
            found = _solve(self.node(j), alpha, event, evaluator, None)
            with self._lock:
                found = self._values.setdefault(key, found)
        return found

    def lookup(self, rho, alpha, event, evaluator):
        j = self.bracket(rho)
        left = self.get(j, alpha, event, evaluator)
        right = self.get(j + 1, alpha, event, evaluator)
        lo, hi = self.node(j), self.node(j + 1)
        weight = 0.0 if hi <= lo else float(np.clip((rho - lo) / (hi - lo), 0.0, 1.0))
        c_hat = (1.0 - weight) * left.c_hat + weight * right.c_hat
        return CriticalValue(
            c_hat=float(c_hat),
            alpha=alpha,
            rho=float(rho),
            iterations=left.iterations + right.iterations,
            tolerance=max(left.tolerance, right.tolerance),
            argmin_delta=left.argmin_delta if weight < 0.5 else right.argmin_delta,
        )

    def prefill(self, rhos, alpha, event="relaxed", evaluator="analytic", n_jobs=1):
        """Solve every lattice node needed for ``rhos`` in parallel."""
        nodes = sorted({j + shift for j in map(self.bracket, np.atleast_1d(rhos)) for shift in (0, 1)})
        missing = [j for j in nodes if (j, float(alpha), event, evaluator) not in self._values]
        solved = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_solve)(self.node(j), alpha, event, evaluator, None) for j in missing
        )
        with self._lock:
            for j, value in zip(missing, solved):
                self._values.setdefault((j, float(alpha), event, evaluator), value)
        logger.debug("solved %d critical-value lattice nodes", len(missing))


_CACHES = {}


def critical_value(rho, alpha, *, event="relaxed", evaluator="analytic", delta=None, memoize=True,
                   lattice_step=0.01, cache=None):
    """Critical value of the misspecification-robust interval

    Solves inf over delta >= 0 of P(A or B) = 1 - alpha for c by bisection on
    [z_{1-alpha}, z_{1-alpha/2}] to a tolerance of 1e-3 and returns the upper
    end of the final bracket. A coverage below 1 - alpha at the upper end
    raises :class:`SolverError`. With ``delta`` the equation is solved at that
    separation instead of the infimum. Memoized solutions live on a lattice
    in rho and are interpolated linearly.

    :param rho: correlation of the bound estimates
    :type rho: float
    :param alpha: level in (0, 0.5)
    :type alpha: float
    :param event: ``"relaxed"`` or ``"literal"`` coverage event
    :type event: str
    :param evaluator: ``"analytic"`` or ``"qmc"`` probability evaluator
    :type evaluator: str
    :param delta: fixed separation, None for the infimum
    :type delta: float
    :param memoize: read and fill the lattice cache
    :type memoize: bool
    :param lattice_step: spacing of the cache lattice in rho
    :type lattice_step: float
    :param cache: lattice cache, a module-wide one per lattice step by default
    :type cache: CriticalValueCache
    :returns: the critical value and solver diagnostics
    :rtype: CriticalValue
    :examples: critical_value(0.0, 0.05).c_hat
    """
    if not 0.0 < alpha < 0.5:
        raise SolverError(f"alpha must lie in (0, 0.5), got {alpha}")
    rho = float(np.clip(rho, -RHO_LIMIT, RHO_LIMIT))
    if delta is not None or not memoize:
        return _solve(rho, alpha, event, evaluator, delta)
    if cache is None:
        cache = _CACHES.setdefault(float(lattice_step), CriticalValueCache(lattice_step))
    return cache.lookup(rho, alpha, event, evaluator)
