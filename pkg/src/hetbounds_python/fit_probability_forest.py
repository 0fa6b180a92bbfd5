import logging
from dataclasses import dataclass

import numpy as np

from .errors import FoldError
from .grow_honest_forest import _design, grow_honest_forest

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ProbabilityForest:
    """Honest forest estimate of P(target = 1 | x)."""

    members: tuple
    leaf_values: tuple
    fallback: float
    clip: float

    def predict(self, x):
        x = _design(x)
        total = np.zeros(x.shape[0])
        count = np.zeros(x.shape[0])
        for member, values in zip(self.members, self.leaf_values):
            leaf = values[member.tree.apply(x)]
            present = np.isfinite(leaf)
            total[present] += leaf[present]
            count[present] += 1
        probability = np.where(count > 0, total / np.maximum(count, 1), self.fallback)
        return np.clip(probability, self.clip, 1.0 - self.clip)

    def describe(self):
        return {"learner": "probability_forest", "trees": len(self.members)}


def fit_probability_forest(x, target, config, seed=None):
    """Honest probability forest

    Averages, over honest trees, the frequency of ``target == 1`` among the
    estimation rows of the leaf a query falls into. Leaves without estimation
    rows are skipped for that tree; a query reaching only such leaves gets
    the training frequency. Predictions are clipped into
    [config.clip, 1 - config.clip].

    :param x: features, shape (n, p)
    :type x: numpy.ndarray
    :param target: binary target (selection indicator or any other 0/1 variable)
    :type target: numpy.ndarray
    :param config: forest hyperparameters
    :type config: LearnerConfig
    :param seed: overrides ``config.seed``
    :type seed: int
    :returns: fitted predictor
    :rtype: ProbabilityForest
    :examples: fit_probability_forest(x, s, LearnerConfig(trees=200)).predict(x)
    """
    target = np.asarray(target, dtype=float)
    x = _design(x)
    members = grow_honest_forest(
        x,
        target,
        trees=config.trees,
        subsample_fraction=config.subsample_fraction,
        honesty_fraction=config.honesty_fraction,
        min_leaf_size=config.min_leaf_size,
        max_features=config.max_features,
        seed=config.seed if seed is None else seed,
        n_jobs=config.n_jobs,
    )
    leaf_values = []
    for member in members:
        counts = member.leaf_counts()
        sums = np.bincount(member.leaf_of_sample, weights=target[member.sample], minlength=counts.size)
        with np.errstate(invalid="ignore", divide="ignore"):
            leaf_values.append(np.where(counts > 0, sums / np.maximum(counts, 1), np.nan))
    return ProbabilityForest(
        members=tuple(members), leaf_values=tuple(leaf_values), fallback=float(np.mean(target)), clip=config.clip
    )


@dataclass(frozen=True, eq=False)
class ForestSelection:
    """Selection probabilities s(d, x) from one forest per arm or a joint forest on (x, d)."""

    forests: tuple
    mode: str

    def predict(self, x, d):
        x = _design(x)
        d = np.broadcast_to(np.asarray(d, dtype=float), (x.shape[0],))
        if self.mode == "joint":
            return self.forests[0].predict(np.column_stack([x, d]))
        out = np.empty(x.shape[0])
        for arm in (0, 1):
            rows = d == arm
            if np.any(rows):
                out[rows] = self.forests[arm].predict(x[rows])
        return out

    def describe(self):
        return {"learner": "probability_forest", "mode": self.mode, "trees": [len(f.members) for f in self.forests]}


def fit_forest_selection(x, d, s, config, seed=None):
    """Selection model built from :func:`fit_probability_forest` per ``config.selection_mode``."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    d = np.asarray(d)
    s = np.asarray(s, dtype=float)
    seed = config.seed if seed is None else seed
    if config.selection_mode == "joint":
        forest = fit_probability_forest(np.column_stack([_design(x), d]), s, config, seed=seed)
        return ForestSelection(forests=(forest,), mode="joint")
    forests = []
    for arm in (0, 1):
        rows = d == arm
        if not np.any(rows):
            raise FoldError(f"no training rows with treatment {arm} for the selection forest")
        forests.append(fit_probability_forest(x[rows], s[rows], config, seed=seed + arm))
    return ForestSelection(forests=tuple(forests), mode="per_arm")
