from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_GRID


@dataclass(frozen=True, eq=False)
class TrimmingLevels:
    """Quantile levels at which each unit's outcome distribution is trimmed."""

    lower: np.ndarray
    upper: np.ndarray
    rounded: bool


def _snap(levels, grid, rounding):
    if not rounding:
        return np.clip(levels, grid[0], grid[-1])
    index = np.abs(levels[:, None] - grid[None, :]).argmin(axis=1)
    return grid[index]


def trimming_levels(cells, grid=DEFAULT_GRID, rounding=True):
    """Per-unit trimming quantile levels

    PLUS units trim the selected treated outcome at levels p0 (lower bound)
    and 1 - p0 (upper bound); MINUS units trim the selected control outcome at
    1 - 1/p0 and 1/p0. Levels are rounded to the nearest grid point, or, with
    ``rounding`` off, only clipped into the grid range.

    :param cells: classification with trimming shares
    :type cells: CellClassification
    :param grid: quantile grid
    :type grid: tuple
    :param rounding: snap to the nearest grid point
    :type rounding: bool
    :returns: lower and upper levels per unit
    :rtype: TrimmingLevels
    :examples: trimming_levels(cells).lower
    """
    grid = np.asarray(grid, dtype=float)
    p0 = np.asarray(cells.p0, dtype=float)
    lower = np.where(cells.plus, p0, 1.0 - 1.0 / p0)
    upper = np.where(cells.plus, 1.0 - p0, 1.0 / p0)
    return TrimmingLevels(lower=_snap(lower, grid, rounding), upper=_snap(upper, grid, rounding), rounded=rounding)
