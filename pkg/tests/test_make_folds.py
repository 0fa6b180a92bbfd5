import numpy as np
import pytest
from sklearn.model_selection import KFold

from hetbounds_python.errors import ConfigurationError
from hetbounds_python.make_folds import make_folds


def test_fold_sizes_differ_by_at_most_one():
    folds = make_folds(10, 2, 1)
    assert folds.sizes().tolist() == [5, 5]
    folds = make_folds(11, 2, 1)
    assert sorted(folds.sizes().tolist()) == [5, 6]
    folds = make_folds(103, 10, 4)
    assert folds.sizes().max() - folds.sizes().min() <= 1


def test_folds_partition_the_units():
    folds = make_folds(57, 5, 3)
    assert set(np.unique(folds.fold_of)) == {1, 2, 3, 4, 5}
    for fold in range(1, 6):
        inside = folds.indices(fold)
        outside = folds.complement(fold)
        assert np.intersect1d(inside, outside).size == 0
        assert inside.size + outside.size == 57


def test_assignment_depends_only_on_seed():
    first = make_folds(200, 10, 42)
    second = make_folds(200, 10, 42)
    other = make_folds(200, 10, 43)
    np.testing.assert_array_equal(first.fold_of, second.fold_of)
    assert not np.array_equal(first.fold_of, other.fold_of)


def test_assignment_is_read_only():
    folds = make_folds(20, 2, 0)
    with pytest.raises(ValueError):
        folds.fold_of[0] = 2


@pytest.mark.parametrize("n, k", [(10, 1), (3, 2), (19, 10)])
def test_invalid_fold_counts_raise(n, k):
    with pytest.raises(ConfigurationError):
        make_folds(n, k, 0)


def test_folds_are_the_shuffled_kfold_test_sets():
    folds = make_folds(50, 5, 7)
    splitter = KFold(n_splits=5, shuffle=True, random_state=7)
    for fold, (train, test) in enumerate(splitter.split(np.arange(50)), start=1):
        np.testing.assert_array_equal(folds.indices(fold), np.sort(test))
        np.testing.assert_array_equal(folds.complement(fold), np.sort(train))


def test_large_seed_is_accepted():
    folds = make_folds(40, 4, 2**40 + 3)
    assert folds.sizes().tolist() == [10, 10, 10, 10]
