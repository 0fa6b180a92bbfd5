import dataclasses
import logging

import numpy as np
import pandas as pd
from scipy.integrate import quad

from .build_basis import BasisSpec
from .coverage_study import replicate_intervals
from .true_theta import true_theta

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
STRATA = {"z0": (0.0, 0.5), "z1": (0.5, 1.0)}


def stratum_indicator(table):
    """Z = 1{X_1 >= 0.5}: 0 for stratum z0, 1 for stratum z1."""
    return (table.x[:, 0] >= 0.5).astype(float)


def integrated_theta(lo, hi, config):
    """Mean of theta(z) over X_1 uniform on [lo, hi]."""
    value, _ = quad(lambda z: float(true_theta(z, config)), lo, hi)
    return value / (hi - lo)


def run_power_study(config, settings, reps, deviations, nuisance="estimated", n_jobs=1):
    """Rejection frequencies against shifted nulls in two strata

    Projects the scores on the indicator basis of Z = 1{X_1 >= 0.5}, so the
    projected bounds are the bounds on the effect averaged over X_1 in
    [0, 0.5) (stratum z0) and [0.5, 1] (stratum z1). For every deviation
    delta the null value is the true averaged effect plus delta, and it is
    rejected when it falls outside the pointwise interval.

    :param config: design
    :type config: RoyConfig
    :param settings: estimator settings; the basis candidates are replaced by the indicator basis
    :type settings: EstimatorSettings
    :param reps: replications
    :type reps: int
    :param deviations: deviations from the true averaged effect
    :type deviations: sequence of float
    :param nuisance: ``"estimated"`` or ``"oracle"``
    :type nuisance: str
    :param n_jobs: joblib workers
    :type n_jobs: int
    :returns: table with columns stratum, deviation, theta_bar, power, mc_se, reps_ok
    :rtype: pandas.DataFrame
    :examples: run_power_study(RoyConfig(n=2000), EstimatorSettings(), 500, np.linspace(-0.5, 0.5, 11))
    """
    indicator = (BasisSpec("indicator", categories=(0.0, 1.0)),)
    settings = dataclasses.replace(settings, candidates=indicator, candidates_upper=None, share_basis=False)
    z_grid = np.array([0.0, 1.0])
    intervals = replicate_intervals(
        config, settings, reps, z_grid, nuisance,
        heterogeneity=stratum_indicator, kinds=("categorical",), n_jobs=n_jobs,
    )
    ci_lo = np.array([r.ci_lo for r in intervals])
    ci_hi = np.array([r.ci_hi for r in intervals])
    reps_ok = ci_lo.shape[0]

    rows = []
    for g, (name, (lo, hi)) in enumerate(STRATA.items()):
        theta_bar = integrated_theta(lo, hi, config)
        for deviation in deviations:
            null = theta_bar + deviation
            power = float(np.mean((null < ci_lo[:, g]) | (null > ci_hi[:, g])))
            rows.append({
                "stratum": name,
                "deviation": float(deviation),
                "theta_bar": theta_bar,
                "power": power,
                "mc_se": float(np.sqrt(power * (1.0 - power) / reps_ok)),
                "reps_ok": reps_ok,
            })
    logger.info("power study finished with %d replications", reps_ok)
    return pd.DataFrame(rows)
