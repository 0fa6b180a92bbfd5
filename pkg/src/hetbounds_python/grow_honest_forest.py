import logging
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from sklearn.tree import DecisionTreeRegressor

from .errors import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class HonestTree:
    """A tree whose splits come from one half-sample and whose leaf contents come from the other.

    ``sample`` holds the estimation rows and ``leaf_of_sample`` their leaf ids.
    """

    tree: DecisionTreeRegressor
    sample: np.ndarray
    leaf_of_sample: np.ndarray

    def leaf_counts(self):
        return np.bincount(self.leaf_of_sample, minlength=self.tree.tree_.node_count)


def _design(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[1] == 0:
        return np.zeros((x.shape[0], 1))
    return x


def _grow_one(x, y, seed, subsample_fraction, honesty_fraction, min_leaf_size, max_features):
    rng = np.random.default_rng(seed)
    n = y.shape[0]
    size = min(n, max(2 * min_leaf_size, int(round(subsample_fraction * n))))
    draw = rng.choice(n, size=size, replace=False) if size < n else rng.permutation(n)
    if honesty_fraction > 0:
        split = int(round((1.0 - honesty_fraction) * size))
        split = min(max(split, min_leaf_size), size - 1)
        structure, estimate = draw[:split], draw[split:]
    else:
        structure = estimate = draw
    tree = DecisionTreeRegressor(
        min_samples_leaf=min_leaf_size,
        max_features=max_features,
        random_state=int(rng.integers(np.iinfo(np.int32).max)),
    )
    tree.fit(x[structure], y[structure])
    estimate = np.sort(estimate)
    return HonestTree(tree=tree, sample=estimate, leaf_of_sample=tree.apply(x[estimate]))


def grow_honest_forest(x, y, trees, subsample_fraction, honesty_fraction, min_leaf_size, max_features, seed, n_jobs=1):
    """Grow honest regression trees on subsamples

    Each tree draws a subsample without replacement, grows its structure with
    a scikit-learn regression tree on one part and records which leaves the
    disjoint estimation part falls into. With ``honesty_fraction`` 0 both
    roles use the whole subsample.

    :param x: features, shape (n, p); p may be 0
    :type x: numpy.ndarray
    :param y: target used for splitting
    :type y: numpy.ndarray
    :param trees: number of trees
    :type trees: int
    :param subsample_fraction: share of rows drawn per tree
    :type subsample_fraction: float
    :param honesty_fraction: share of each subsample reserved for leaf estimates
    :type honesty_fraction: float
    :param min_leaf_size: minimum rows per leaf
    :type min_leaf_size: int
    :param max_features: features tried per split (scikit-learn semantics), None for all
    :type max_features: int or float or None
    :param seed: random seed; tree seeds are spawned from it
    :type seed: int
    :param n_jobs: joblib workers
    :type n_jobs: int
    :returns: the trees
    :rtype: list of HonestTree
    """
    x = _design(x)
    y = np.asarray(y, dtype=float)
    if y.shape[0] < 2 * min_leaf_size:
        raise ConfigurationError(
            f"forest needs at least {2 * min_leaf_size} training rows, got {y.shape[0]}"
        )
    seeds = np.random.SeedSequence(seed).generate_state(trees)
    members = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_grow_one)(x, y, int(s), subsample_fraction, honesty_fraction, min_leaf_size, max_features)
        for s in seeds
    )
    logger.debug("grew %d honest trees on %d rows", trees, y.shape[0])
    return members
