import logging
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from .bootstrap_fit import bootstrap_fit
from .errors import ProjectionError, SolverError
from .t_process import refine_grid, t_process

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
DISCARD_SHARE = 0.01
MAX_ATTEMPTS = 20


@dataclass(frozen=True, eq=False)
class BootstrapRun:
    """Extremes of the bootstrap t process over the refined grid, one entry per replication."""

    reps: int
    seed: int
    inf_t_L: np.ndarray
    sup_t_U: np.ndarray
    discarded: int
    grid: np.ndarray

    def quantiles(self, alpha):
        """(c_{alpha/2}(inf t_L), c_{1-alpha/2}(sup t_U))."""
        return (
            float(np.nanquantile(self.inf_t_L, alpha / 2.0)),
            float(np.nanquantile(self.sup_t_U, 1.0 - alpha / 2.0)),
        )

    def describe(self, alpha):
        lower, upper = self.quantiles(alpha)
        return {
            "reps": self.reps,
            "seed": self.seed,
            "discarded": self.discarded,
            "grid_points": int(self.grid.shape[0]),
            "alpha": alpha,
            "quantile_inf_t_L": lower,
            "quantile_sup_t_U": upper,
        }


def _one_rep(psi, curve, grid, seed, rep):
    rng = np.random.default_rng([seed, rep])
    discarded = 0
    for _ in range(MAX_ATTEMPTS):
        weights = rng.standard_exponential(curve.n)
        try:
            boot_curve = bootstrap_fit(psi, curve.basis_L, curve.basis_U, weights)
        except ProjectionError:
            discarded = discarded + 1
            continue
        stats = t_process(curve, boot_curve, grid)
        return stats.inf_L, stats.sup_U, discarded
    return np.nan, np.nan, discarded


def run_bootstrap(psi, curve, z_grid, reps=1000, seed=0, kinds=None, n_jobs=1):
    """Exponential multiplier bootstrap of the bound curves

    Every replication draws standard exponential weights h_i from a stream
    seeded by (seed, rep), refits both bound regressions with the same
    weights and records inf t_L and sup t_U over the grid, refined to at
    least 101 points per continuous dimension. Nuisances and scores are not
    refit. A replication with a singular weighted design is redrawn and
    counted; more than 1% discarded draws raise :class:`SolverError`.

    :param psi: pseudo-outcomes
    :type psi: ScoreVector
    :param curve: sample fit
    :type curve: BoundsCurve
    :param z_grid: user evaluation grid
    :type z_grid: numpy.ndarray
    :param reps: replications
    :type reps: int
    :param seed: random seed
    :type seed: int
    :param kinds: column kinds of Z, for grid refinement
    :type kinds: tuple
    :param n_jobs: joblib workers
    :type n_jobs: int
    :returns: the replications' extremes
    :rtype: BootstrapRun
    :examples: run_bootstrap(scores, curve, np.linspace(0, 1, 50), reps=1000, seed=1).quantiles(0.10)
    """
    if reps < 1:
        raise SolverError("bootstrap needs at least one replication", module="uniform_bands")
    grid = refine_grid(z_grid, kinds)
    results = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_one_rep)(psi, curve, grid, seed, rep) for rep in range(reps)
    )
    inf_t_L = np.array([r[0] for r in results])
    sup_t_U = np.array([r[1] for r in results])
    discarded = int(sum(r[2] for r in results))
    if discarded > DISCARD_SHARE * reps:
        raise SolverError(
            f"{discarded} of {reps} bootstrap draws had a singular weighted design (cap {DISCARD_SHARE:.0%})",
            module="uniform_bands",
        )
    logger.info("bootstrap finished: %d replications, %d discarded draws", reps, discarded)
    return BootstrapRun(reps=reps, seed=seed, inf_t_L=inf_t_L, sup_t_U=sup_t_U, discarded=discarded, grid=grid)
