import numpy as np
import pytest

from conftest import constant_nuisance

from hetbounds_python.classify_cells import classify_cells
from hetbounds_python.nuisance_fit import NuisanceFit
from hetbounds_python.trimming_levels import trimming_levels


def _nuisance(s0, s1):
    s0 = np.asarray(s0, dtype=float)
    grid = np.array([0.25, 0.5, 0.75])
    return NuisanceFit(s0_hat=s0, s1_hat=np.asarray(s1, dtype=float), grid=grid, q1_grid=np.zeros((s0.size, 3)))


def test_signs_and_shares():
    cells = classify_cells(_nuisance([0.4, 0.6, 0.3], [0.8, 0.5, 0.6]))
    assert cells.plus.tolist() == [True, False, True]
    assert cells.p0 == pytest.approx([0.5, 1.2, 0.5])
    assert cells.mu10_plus == pytest.approx(0.35)
    assert cells.mu11_minus == pytest.approx(0.5)
    assert cells.sign_labels().tolist() == ["plus", "minus", "plus"]


def test_empty_cell_has_no_normalizer():
    cells = classify_cells(_nuisance([0.4, 0.3], [0.8, 0.6]))
    assert cells.mu11_minus is None
    assert cells.minus.sum() == 0


def test_ties_go_to_plus():
    cells = classify_cells(_nuisance([0.5, 0.5], [0.5, 0.4]))
    assert cells.plus.tolist() == [True, False]
    assert cells.ties == 1


def test_levels_in_both_cells():
    cells = classify_cells(constant_nuisance(1, 0.4, 0.8, lambda u: u))
    levels = trimming_levels(cells)
    assert levels.lower == pytest.approx([0.5])
    assert levels.upper == pytest.approx([0.5])

    cells = classify_cells(_nuisance([0.5], [0.4]))
    levels = trimming_levels(cells)
    assert levels.lower == pytest.approx([0.2])
    assert levels.upper == pytest.approx([0.8])


def test_levels_snap_to_grid():
    cells = classify_cells(_nuisance([0.499], [0.5]))
    rounded = trimming_levels(cells)
    assert rounded.lower == pytest.approx([0.99])
    assert rounded.upper == pytest.approx([0.01])
    exact = trimming_levels(cells, rounding=False)
    assert exact.lower == pytest.approx([0.99])
    assert exact.upper == pytest.approx([0.01])

    cells = classify_cells(_nuisance([0.333], [0.5]))
    assert trimming_levels(cells).lower == pytest.approx([0.67])
    assert trimming_levels(cells, rounding=False).lower == pytest.approx([0.666])
