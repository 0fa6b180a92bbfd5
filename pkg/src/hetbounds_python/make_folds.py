from dataclasses import dataclass

import numpy as np
from sklearn.model_selection import KFold

from .errors import ConfigurationError

# CONSTANTS ___________________________________________________________________
SEED_RANGE = 2**32


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    """K-fold partition; ``fold_of`` holds fold labels 1..k."""

    k: int
    fold_of: np.ndarray
    seed: int

    def indices(self, fold):
        """Rows in ``fold``."""
        return np.flatnonzero(self.fold_of == fold)

    def complement(self, fold):
        """Rows outside ``fold``."""
        return np.flatnonzero(self.fold_of != fold)

    def sizes(self):
        return np.bincount(self.fold_of, minlength=self.k + 1)[1:]


def make_folds(n, k, seed):
    """Random balanced fold partition

    Labels the test sets of a shuffled :class:`sklearn.model_selection.KFold`
    split 1..k, so fold sizes differ by at most one and the assignment depends
    only on (seed, n, k).

    :param n: number of units
    :type n: int
    :param k: number of folds, at least 2
    :type k: int
    :param seed: random seed
    :type seed: int
    :returns: the fold partition
    :rtype: FoldAssignment
    :examples: make_folds(10, 2, 1).sizes()
    """
    if k < 2:
        raise ConfigurationError(f"at least two folds are required, got k={k}")
    if n < 2 * k:
        raise ConfigurationError(f"n={n} units cannot support k={k} folds (need n >= 2k)")
    splitter = KFold(n_splits=k, shuffle=True, random_state=int(seed) % SEED_RANGE)
    fold_of = np.empty(n, dtype=np.int64)
    for fold, (_, test) in enumerate(splitter.split(np.arange(n)), start=1):
        fold_of[test] = fold
    fold_of.setflags(write=False)
    return FoldAssignment(k=k, fold_of=fold_of, seed=seed)
