import logging

import numpy as np

from .errors import ConfigurationError, FoldError
from .fit_linear_quantile import fit_linear_quantile_grid
from .fit_logistic_selection import fit_logistic_selection
from .fit_probability_forest import fit_forest_selection
from .fit_quantile_forest import fit_quantile_forest
from .nuisance_fit import NuisanceFit

logger = logging.getLogger(__name__)


def _fold_seed(seed, fold):
    return int(np.random.SeedSequence([seed, fold]).generate_state(1)[0])


def fit_selection(x, d, s, config, seed):
    """Selection model chosen by ``config.selection_learner``."""
    if config.selection_learner == "logistic":
        return fit_logistic_selection(x, d, s, ridge_scale=config.ridge_scale, clip=config.clip)
    return fit_forest_selection(x, d, s, config, seed=seed)


def fit_quantiles(x, y, grid, config, seed):
    """Quantile model on the grid chosen by ``config.quantile_learner``; exposes ``predict_grid``."""
    if config.quantile_learner == "linear_quantile":
        return fit_linear_quantile_grid(x, y, grid, n_jobs=config.n_jobs)
    return fit_quantile_forest(x, y, grid, config, seed=seed)


def _check_complement(table, train, fold, config):
    d = table.d_treat[train]
    s = table.s_select[train]
    if not (np.any(d == 1) and np.any(d == 0)):
        raise FoldError(f"training complement of fold {fold} lacks a treatment arm")
    if not np.any((d == 1) & (s == 1)):
        raise FoldError(f"training complement of fold {fold} has no selected treated units")
    if config.control_quantiles and not np.any((d == 0) & (s == 1)):
        raise FoldError(f"training complement of fold {fold} has no selected control units")


def crossfit(table, folds, config):
    """Cross-fitted nuisance predictions

    For every fold f the selection model and the quantile model are trained
    on the complement of f and evaluated on the units of f, so no unit's
    prediction depends on its own data. Quantile models are trained on the
    selected treated rows of the complement only (and, when
    ``config.control_quantiles`` is set, a second model on the selected
    control rows). Selection predictions are clipped into
    [config.clip, 1 - config.clip] and grid quantiles are sorted along the
    grid for every unit (monotone rearrangement).

    :param table: the sample
    :type table: ObservationTable
    :param folds: fold partition of the sample
    :type folds: FoldAssignment
    :param config: learner choice and hyperparameters
    :type config: LearnerConfig
    :returns: out-of-fold predictions for every unit
    :rtype: NuisanceFit
    :examples: crossfit(table, make_folds(table.n, 10, 0), LearnerConfig())
    """
    n = table.n
    if folds.fold_of.shape[0] != n:
        raise ConfigurationError(f"fold assignment covers {folds.fold_of.shape[0]} units, table has {n}")
    if folds.k > n // 2:
        raise ConfigurationError(f"k={folds.k} folds are not supported for n={n} units (k <= n/2)")
    grid = np.asarray(config.grid, dtype=float)
    x, d, s, y = table.x, table.d_treat, table.s_select, table.y_selected

    s0_hat = np.empty(n)
    s1_hat = np.empty(n)
    q1_grid = np.empty((n, grid.size))
    q0_grid = np.empty((n, grid.size)) if config.control_quantiles else None
    models = []
    descriptions = []

    for fold in range(1, folds.k + 1):
        test = folds.indices(fold)
        train = folds.complement(fold)
        _check_complement(table, train, fold, config)
        seed = _fold_seed(config.seed, fold)

        selection = fit_selection(x[train], d[train], s[train], config, seed)
        s0_hat[test] = selection.predict(x[test], 0)
        s1_hat[test] = selection.predict(x[test], 1)

        treated = train[(d[train] == 1) & (s[train] == 1)]
        quantile1 = fit_quantiles(x[treated], y[treated], grid, config, seed + 1)
        q1_grid[test] = quantile1.predict_grid(x[test])
        quantile0 = None
        if config.control_quantiles:
            control = train[(d[train] == 0) & (s[train] == 1)]
            quantile0 = fit_quantiles(x[control], y[control], grid, config, seed + 2)
            q0_grid[test] = quantile0.predict_grid(x[test])

        models.append((selection, quantile1, quantile0))
        descriptions.append({
            "fold": fold,
            "train": int(train.size),
            "selected_treated": int(treated.size),
            "selection": selection.describe(),
            "quantile_treated": quantile1.describe(),
            "quantile_control": None if quantile0 is None else quantile0.describe(),
        })
        logger.debug("fold %d of %d fitted on %d units", fold, folds.k, train.size)

    clipped = int(np.sum((s0_hat <= config.clip) | (s0_hat >= 1 - config.clip)))
    clipped += int(np.sum((s1_hat <= config.clip) | (s1_hat >= 1 - config.clip)))
    s0_hat = np.clip(s0_hat, config.clip, 1.0 - config.clip)
    s1_hat = np.clip(s1_hat, config.clip, 1.0 - config.clip)
    crossings = int(np.sum(np.any(np.diff(q1_grid, axis=1) < 0, axis=1)))
    q1_grid = np.sort(q1_grid, axis=1)
    if q0_grid is not None:
        q0_grid = np.sort(q0_grid, axis=1)

    tag = f"{config.selection_learner}+{config.quantile_learner}"
    logger.info("cross-fitted %s nuisances over %d folds", tag, folds.k)
    return NuisanceFit(
        s0_hat=s0_hat,
        s1_hat=s1_hat,
        grid=grid,
        q1_grid=q1_grid,
        q0_grid=q0_grid,
        learner_tag=tag,
        folds=folds,
        models=tuple(models),
        diagnostics={"learner": tag, "folds": descriptions, "clipped_selection": clipped, "rearranged_units": crossings},
    )
