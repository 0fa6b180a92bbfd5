import logging
from dataclasses import dataclass

import numpy as np

from .errors import emit_warning
from .grow_honest_forest import _design, grow_honest_forest

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
CHUNK_CELLS = 2**22
LEVEL_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class QuantileForest:
    """Forest-weighted empirical quantiles of a training outcome.

    ``order`` sorts the training outcome; ``rank`` maps a training row to its
    position in that order.
    """

    members: tuple
    grid: np.ndarray
    y_sorted: np.ndarray
    rank: np.ndarray
    leaf_rows: tuple
    leaf_starts: tuple
    leaf_counts: tuple

    @property
    def n_train(self):
        return self.y_sorted.size

    def weights(self, x):
        """Dense forest weights, shape (m, n_train), columns in sorted-outcome order."""
        x = _design(x)
        out = np.zeros((x.shape[0], self.n_train))
        for lo, hi in _chunks(x.shape[0], self.n_train):
            out[lo:hi] = self._chunk_weights(x[lo:hi])
        return out

    def _chunk_weights(self, x):
        m, n = x.shape[0], self.n_train
        flat = np.zeros(m * n)
        for member, rows, starts, counts in zip(self.members, self.leaf_rows, self.leaf_starts, self.leaf_counts):
            leaf = member.tree.apply(x)
            size = counts[leaf]
            total = int(size.sum())
            if total == 0:
                continue
            query = np.repeat(np.arange(m), size)
            offset = np.arange(total) - np.repeat(np.cumsum(size) - size, size)
            column = rows[np.repeat(starts[leaf], size) + offset]
            flat += np.bincount(query * n + column, weights=1.0 / size[query], minlength=m * n)
        return flat.reshape(m, n) / len(self.members)

    def predict_grid(self, x):
        """Quantile predictions, shape (m, len(grid)); nondecreasing along the grid."""
        x = _design(x)
        m = x.shape[0]
        out = np.empty((m, self.grid.size))
        empty = 0
        for lo, hi in _chunks(m, self.n_train):
            weight = self._chunk_weights(x[lo:hi])
            cumulative = np.cumsum(weight, axis=1)
            total = cumulative[:, -1]
            for r in range(hi - lo):
                if total[r] <= 0:
                    out[lo + r] = self._global()
                    empty = empty + 1
                    continue
                target = self.grid * total[r] * (1.0 - LEVEL_TOLERANCE)
                index = np.minimum(np.searchsorted(cumulative[r], target, side="left"), self.n_train - 1)
                out[lo + r] = self.y_sorted[index]
        if empty:
            emit_warning(
                logger, "%d query points fell only into empty leaves; used the global empirical quantiles", empty
            )
        return out

    def _global(self):
        index = np.ceil(self.grid * self.n_train * (1.0 - LEVEL_TOLERANCE)).astype(int) - 1
        return self.y_sorted[np.clip(index, 0, self.n_train - 1)]

    def describe(self):
        return {"learner": "quantile_forest", "trees": len(self.members), "levels": int(self.grid.size)}


def _chunks(m, n):
    step = max(1, min(256, CHUNK_CELLS // max(n, 1)))
    for lo in range(0, m, step):
        yield lo, min(m, lo + step)


def fit_quantile_forest(x, y, grid, config, seed=None):
    """Honest quantile regression forest

    The weight of training row j at a query point x is the average over trees
    of 1{j in leaf(x)} / |leaf(x)|, counted on each tree's estimation rows.
    The u-quantile at x is the smallest training outcome whose weighted
    empirical distribution function reaches u. All grid levels read off the
    same weighted distribution, so predictions are monotone in u without
    rearrangement. Queries whose leaves hold no estimation rows in any tree
    fall back to the unweighted empirical quantile with a warning.

    :param x: covariates of the selected treated units, shape (n, p)
    :type x: numpy.ndarray
    :param y: their outcomes
    :type y: numpy.ndarray
    :param grid: quantile levels in (0, 1)
    :type grid: numpy.ndarray
    :param config: forest hyperparameters
    :type config: LearnerConfig
    :param seed: overrides ``config.seed``
    :type seed: int
    :returns: fitted predictor
    :rtype: QuantileForest
    :examples: fit_quantile_forest(x, y, np.arange(1, 100) / 100, LearnerConfig(trees=200)).predict_grid(x[:5])
    """
    x = _design(x)
    y = np.asarray(y, dtype=float)
    members = grow_honest_forest(
        x,
        y,
        trees=config.trees,
        subsample_fraction=config.subsample_fraction,
        honesty_fraction=config.honesty_fraction,
        min_leaf_size=config.min_leaf_size,
        max_features=config.max_features,
        seed=config.seed if seed is None else seed,
        n_jobs=config.n_jobs,
    )
    order = np.argsort(y, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)

    leaf_rows, leaf_starts, leaf_counts = [], [], []
    for member in members:
        counts = member.leaf_counts()
        by_leaf = np.argsort(member.leaf_of_sample, kind="stable")
        leaf_rows.append(rank[member.sample[by_leaf]])
        leaf_starts.append(np.concatenate([[0], np.cumsum(counts)[:-1]]))
        leaf_counts.append(counts)
    logger.debug("quantile forest fitted on %d rows", y.size)
    return QuantileForest(
        members=tuple(members),
        grid=np.asarray(grid, dtype=float),
        y_sorted=y[order],
        rank=rank,
        leaf_rows=tuple(leaf_rows),
        leaf_starts=tuple(leaf_starts),
        leaf_counts=tuple(leaf_counts),
    )
