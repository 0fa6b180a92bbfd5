import logging
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from .errors import emit_warning

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
CONVERGENCE = 1e-9
MAX_ITER = 200
SMOOTHING_DECAY = 0.5
SMOOTHING_FLOOR = 1e-8
POLISH_ROUNDS = 5
UNDERDETERMINED_RIDGE = 1e-8


@dataclass(frozen=True, eq=False)
class LinearQuantile:
    """Affine conditional quantile x -> coef[0] + x @ coef[1:] at one level."""

    coef: np.ndarray
    level: float
    converged: bool
    iterations: int

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        return self.coef[0] + x @ self.coef[1:]


@dataclass(frozen=True, eq=False)
class LinearQuantileGrid:
    """One linear quantile regression per grid level, rearranged on prediction."""

    grid: np.ndarray
    models: tuple

    def predict_grid(self, x):
        """Predictions of shape (m, len(grid)), sorted along the grid axis."""
        columns = np.column_stack([model.predict(x) for model in self.models])
        return np.sort(columns, axis=1)

    def describe(self):
        return {
            "learner": "linear_quantile",
            "levels": len(self.models),
            "converged": int(sum(model.converged for model in self.models)),
            "coef": [[float(b) for b in model.coef] for model in self.models],
        }


def check_loss(residual, level):
    """Pinball loss sum(r * (u - 1{r < 0}))."""
    return float(np.sum(residual * (level - (residual < 0))))


def _weighted_solve(features, y, weight, ridge):
    root = np.sqrt(weight)
    if ridge > 0:
        gram = (features * weight[:, None]).T @ features
        gram = gram + ridge * (1.0 + np.trace(gram)) * np.eye(features.shape[1])
        return np.linalg.solve(gram, (features * weight[:, None]).T @ y)
    return np.linalg.lstsq(features * root[:, None], y * root, rcond=None)[0]


def _polish(features, y, level, beta):
    """Move to the interpolating vertex through the p smallest residuals when it lowers the loss."""
    p = features.shape[1]
    best = check_loss(y - features @ beta, level)
    for _ in range(POLISH_ROUNDS):
        residual = y - features @ beta
        basis = np.argsort(np.abs(residual), kind="stable")[:p]
        candidate = np.linalg.lstsq(features[basis], y[basis], rcond=None)[0]
        loss = check_loss(y - features @ candidate, level)
        if loss > best or np.allclose(candidate, beta, rtol=0.0, atol=1e-14):
            break
        best, beta = loss, candidate
    return beta


def fit_linear_quantile(x, y, u):
    """Linear quantile regression

    Minimizes the check loss sum rho_u(y - [1, x]'b) by iteratively reweighted
    least squares: observation weights (u or 1-u) / max(|r|, h) with the
    smoothing parameter h halved every iteration down to a floor, followed by
    a polish step that moves to the interpolating solution through the
    smallest residuals when that lowers the loss. With fewer rows than
    parameters a ridge-regularized solve is used and a warning emitted.

    :param x: covariates of the selected treated units, shape (n, p)
    :type x: numpy.ndarray
    :param y: outcomes
    :type y: numpy.ndarray
    :param u: quantile level in (0, 1)
    :type u: float
    :returns: fitted predictor
    :rtype: LinearQuantile
    :examples: fit_linear_quantile(np.empty((5, 0)), np.arange(5.0), 0.5).coef
    """
    if not 0.0 < u < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {u}")
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValueError("linear quantile regression needs at least one observation")
    features = np.hstack([np.ones((y.size, 1)), x])
    n, p = features.shape

    ridge = 0.0
    if n < p:
        emit_warning(logger, "quantile regression at level %.2f has %d rows for %d parameters; using a ridge solve", u, n, p)
        ridge = UNDERDETERMINED_RIDGE

    # CONSTANTS ___________________________________________________________________
    spread = float(np.median(np.abs(y - np.median(y))))
    floor = SMOOTHING_FLOOR * max(spread, 1.0)

    # VARIABLES ___________________________________________________________________
    beta = _weighted_solve(features, y, np.ones(n), ridge)
    smoothing = max(spread, floor)
    converged = False
    iteration = 0

    while not converged:
        iteration = iteration + 1
        residual = y - features @ beta
        weight = np.where(residual >= 0, u, 1.0 - u) / np.maximum(np.abs(residual), smoothing)
        beta_new = _weighted_solve(features, y, weight, ridge)

        if np.max(np.abs(beta_new - beta)) < CONVERGENCE * (1.0 + np.max(np.abs(beta))) and smoothing <= floor:
            converged = True

        beta = beta_new
        smoothing = max(smoothing * SMOOTHING_DECAY, floor)

        if converged or (iteration == MAX_ITER):
            break

    if ridge == 0.0:
        beta = _polish(features, y, u, beta)
    return LinearQuantile(coef=beta, level=float(u), converged=converged, iterations=iteration)


def fit_linear_quantile_grid(x, y, grid, n_jobs=1):
    """Fit :func:`fit_linear_quantile` at every level of ``grid``."""
    grid = np.asarray(grid, dtype=float)
    models = Parallel(n_jobs=n_jobs, prefer="threads")(delayed(fit_linear_quantile)(x, y, float(u)) for u in grid)
    failed = sum(not model.converged for model in models)
    if failed:
        logger.info("%d of %d quantile levels stopped at the iteration limit", failed, len(models))
    return LinearQuantileGrid(grid=grid, models=tuple(models))
