import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.special import ndtr

from .errors import ConfigurationError, emit_warning
from .simulate import draw_errors, mu1
from .true_theta import true_theta

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
MAX_ITER = 16


@dataclass(frozen=True, eq=False)
class OracleTruth:
    """Ground truth of the Roy model on a grid of X_1 values."""

    z: np.ndarray
    theta: np.ndarray
    theta_L: np.ndarray
    theta_U: np.ndarray
    s0: np.ndarray
    s1: np.ndarray
    p0: np.ndarray
    counts: np.ndarray
    widths: np.ndarray

    def frame(self):
        return pd.DataFrame({
            "z": self.z,
            "theta": self.theta,
            "theta_L": self.theta_L,
            "theta_U": self.theta_U,
            "s0": self.s0,
            "s1": self.s1,
            "p0": self.p0,
            "count": self.counts,
            "width": self.widths,
        })


def _chunk(config, seed, chunk, size, lo, hi):
    """Treated-selected Y(1) and control-selected Y(0) draws falling in each stratum."""
    rng = np.random.default_rng([seed, chunk])
    x1 = np.sort(rng.uniform(size=size))
    eps1, eps0, v = draw_errors(rng, size, config)
    index = x1 * config.gamma1
    treated = v <= index + 1.0
    control = v <= index
    y1 = mu1(x1) + eps1
    start = np.searchsorted(x1, lo, side="left")
    stop = np.searchsorted(x1, hi, side="right")
    kept_y1 = []
    control_sums = np.zeros(lo.size)
    control_counts = np.zeros(lo.size, dtype=np.int64)
    for g in range(lo.size):
        window = slice(start[g], stop[g])
        kept_y1.append(y1[window][treated[window]])
        control_sums[g] = eps0[window][control[window]].sum()
        control_counts[g] = int(control[window].sum())
    return kept_y1, control_sums, control_counts


def _strata(z, widths, config, draws, chunk, seed, n_jobs):
    lo = np.clip(z - widths / 2.0, 0.0, 1.0)
    hi = np.clip(z + widths / 2.0, 0.0, 1.0)
    sizes = [min(chunk, draws - start) for start in range(0, draws, chunk)]
    parts = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_chunk)(config, seed, c, size, lo, hi) for c, size in enumerate(sizes)
    )
    y1 = [np.concatenate([part[0][g] for part in parts]) for g in range(z.size)]
    control_sums = np.sum([part[1] for part in parts], axis=0)
    control_counts = np.sum([part[2] for part in parts], axis=0)
    return y1, control_sums, control_counts


def _trimmed_means(y1, p0):
    values = np.sort(y1)
    kept = max(1, int(round(p0 * values.size)))
    return values[:kept].mean(), values[-kept:].mean()


def oracle_bounds(z_grid, config, draws=10_000_000, chunk=1_000_000, width=0.02, seed=12345, n_jobs=1):
    """Brute-force bound curves of the Roy model

    Draws X_1 uniformly with the latent errors and potential outcomes, groups
    the draws into strata of the given width around every grid point and
    computes the trimmed means of Y(1) among units selected under treatment,
    trimmed at the analytic share p0(z) = Phi(z gamma_1) / Phi(z gamma_1 + 1),
    minus the mean of Y(0) among units selected under control. Every point of
    this design is a PLUS cell. A stratum without draws in either arm is
    widened by doubling and recomputed.

    :param z_grid: grid points in [0, 1]
    :type z_grid: numpy.ndarray
    :param config: design
    :type config: RoyConfig
    :param draws: total Monte Carlo draws
    :type draws: int
    :param chunk: draws per task
    :type chunk: int
    :param width: stratum width
    :type width: float
    :param seed: random seed
    :type seed: int
    :param n_jobs: joblib workers
    :type n_jobs: int
    :returns: truth on the grid
    :rtype: OracleTruth
    :examples: oracle_bounds(np.linspace(0, 1, 50), RoyConfig()).frame()
    """
    z = np.atleast_1d(np.asarray(z_grid, dtype=float))
    if np.any((z < 0.0) | (z > 1.0)):
        raise ConfigurationError("oracle grid points must lie in [0, 1]", module="roy_simulator")
    if draws < 1 or chunk < 1 or width <= 0.0:
        raise ConfigurationError("oracle draws, chunk and width must be positive", module="roy_simulator")

    # VARIABLES _______________________________________________________________
    widths = np.full(z.size, width)
    iteration = 0

    while True:
        iteration = iteration + 1
        y1, control_sums, control_counts = _strata(z, widths, config, draws, chunk, seed, n_jobs)
        counts = np.array([values.size for values in y1])
        empty = (counts == 0) | (control_counts == 0)
        converged = not np.any(empty)
        if converged or (iteration == MAX_ITER):
            break
        for g in np.flatnonzero(empty):
            emit_warning(logger, "oracle stratum at z=%.4g is empty; widening to %.4g", z[g], 2.0 * widths[g])
        widths = np.where(empty, 2.0 * widths, widths)

    if not converged:
        raise ConfigurationError("oracle strata stayed empty; increase draws", module="roy_simulator")

    s0 = ndtr(z * config.gamma1)
    s1 = ndtr(z * config.gamma1 + 1.0)
    p0 = s0 / s1
    control_mean = control_sums / control_counts
    trimmed = np.array([_trimmed_means(values, share) for values, share in zip(y1, p0)])
    logger.info("oracle bounds from %d draws on %d grid points", draws, z.size)
    return OracleTruth(
        z=z,
        theta=np.asarray(true_theta(z, config), dtype=float),
        theta_L=trimmed[:, 0] - control_mean,
        theta_U=trimmed[:, 1] - control_mean,
        s0=s0,
        s1=s1,
        p0=p0,
        counts=counts,
        widths=widths,
    )
