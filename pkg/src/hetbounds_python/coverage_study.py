import dataclasses
import logging

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from .confidence_interval import confidence_interval
from .critical_value import CriticalValueCache
from .errors import ConfigurationError, HetBoundsError, StudyError, emit_warning
from .pipeline import fit_curves
from .simulate import simulate
from .true_nuisance import true_nuisance
from .true_theta import true_theta

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
FAILURE_SHARE = 0.02
MIN_REPS = 100


def rep_seed(seed, rep):
    """Seed of replication ``rep``, a function of (seed, rep) only."""
    return int(np.random.SeedSequence([seed, rep]).generate_state(1)[0])


def first_covariate(table):
    return table.x[:, 0]


def _one_rep(config, settings, rep, z_grid, nuisance, heterogeneity, kinds):
    seed = rep_seed(config.seed, rep)
    design = dataclasses.replace(config, seed=seed)
    learners = dataclasses.replace(settings.learners, seed=seed, n_jobs=1)
    rep_settings = dataclasses.replace(settings, seed=seed, learners=learners, n_jobs=1, bootstrap_reps=0)
    try:
        table = simulate(design)
        fitted = true_nuisance(table, design) if nuisance == "oracle" else None
        fit = fit_curves(table, heterogeneity(table), kinds, rep_settings, z_grid, fitted)
    except HetBoundsError as exc:
        logger.info("replication %d failed: error[%s]: %s", rep, exc.module, exc)
        return None
    logger.debug("replication %d done", rep)
    return fit.frame, fit.curve.n


def replicate_intervals(config, settings, reps, z_grid, nuisance="estimated", heterogeneity=first_covariate,
                        kinds=("continuous",), n_jobs=1):
    """Pointwise intervals of independent Roy samples

    Every replication draws a sample from ``config`` with its own seed,
    fits the bound curves and evaluates them on ``z_grid``. Critical values
    for all replications are then solved once on a shared lattice cache.
    Failed replications are dropped; more than 2% failures raise
    :class:`StudyError`.

    :returns: one :class:`IntervalResult` per successful replication
    :rtype: list
    """
    if reps < 1:
        raise ConfigurationError(f"reps must be at least 1, got {reps}")
    if reps < MIN_REPS:
        emit_warning(logger, "%d replications give Monte Carlo errors above 0.02; use at least %d", reps, MIN_REPS)
    fits = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_one_rep)(config, settings, rep, z_grid, nuisance, heterogeneity, kinds) for rep in range(reps)
    )
    failed = sum(fit is None for fit in fits)
    if failed > FAILURE_SHARE * reps:
        raise StudyError(f"{failed} of {reps} replications failed (cap {FAILURE_SHARE:.0%})")
    fits = [fit for fit in fits if fit is not None]

    inference = settings.inference
    cache = CriticalValueCache(inference.lattice_step)
    if inference.memoize:
        rhos = np.concatenate([frame["rho"].to_numpy() for frame, _ in fits])
        cache.prefill(rhos, settings.alpha, inference.event, inference.evaluator, n_jobs=n_jobs)
    intervals = [
        confidence_interval(
            frame["theta_L"].to_numpy(), frame["theta_U"].to_numpy(),
            frame["sigma_L"].to_numpy(), frame["sigma_U"].to_numpy(), frame["rho"].to_numpy(),
            n, settings.alpha, inference, cache=cache,
        )
        for frame, n in fits
    ]
    logger.info("%d of %d replications succeeded", len(intervals), reps)
    return intervals


def run_coverage_study(config, settings, reps, z_grid, nuisance="estimated", n_jobs=1):
    """Pointwise coverage of the always-taker effect

    Repeats simulate, estimate and interval construction ``reps`` times and
    reports at every grid point the share of intervals containing the true
    effect theta(z), with its Monte Carlo standard error.

    :param config: design
    :type config: RoyConfig
    :param settings: estimator settings
    :type settings: EstimatorSettings
    :param reps: replications, at least 100 for a meaningful table
    :type reps: int
    :param z_grid: grid points in [0, 1]
    :type z_grid: numpy.ndarray
    :param nuisance: ``"estimated"`` (cross-fitted) or ``"oracle"`` (analytic)
    :type nuisance: str
    :param n_jobs: joblib workers
    :type n_jobs: int
    :returns: table with columns z, theta, coverage, mc_se, reps_ok
    :rtype: pandas.DataFrame
    :examples: run_coverage_study(RoyConfig(n=2000), EstimatorSettings(), 500, np.linspace(0.1, 0.9, 9))
    """
    z_grid = np.asarray(z_grid, dtype=float)
    intervals = replicate_intervals(config, settings, reps, z_grid, nuisance, n_jobs=n_jobs)
    theta = np.asarray(true_theta(z_grid, config), dtype=float)
    covered = np.array([(r.ci_lo <= theta) & (theta <= r.ci_hi) for r in intervals], dtype=float)
    reps_ok = covered.shape[0]
    coverage = covered.mean(axis=0)
    return pd.DataFrame({
        "z": z_grid,
        "theta": theta,
        "coverage": coverage,
        "mc_se": np.sqrt(coverage * (1.0 - coverage) / reps_ok),
        "reps_ok": reps_ok,
    })
