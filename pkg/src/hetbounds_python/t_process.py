import logging
from dataclasses import dataclass

import numpy as np

from .errors import emit_warning
from .variance_field import variance_field

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
MIN_POINTS = 101


@dataclass(frozen=True, eq=False)
class TStatistics:
    """Bootstrap t process of one replication on a grid."""

    t_L: np.ndarray
    t_U: np.ndarray
    inf_L: float
    sup_U: float
    skipped: int


def refine_grid(z_grid, kinds=None, points=MIN_POINTS):
    """Grid with at least ``points`` values per continuous dimension.

    Continuous columns are refined to an even spacing over their range joined
    with the original values; categorical columns keep their values. Several
    columns are combined as a product grid.
    """
    z_grid = np.asarray(z_grid, dtype=float)
    matrix = z_grid[:, None] if z_grid.ndim == 1 else z_grid
    kinds = ("continuous",) * matrix.shape[1] if kinds is None else tuple(kinds)
    axes = []
    for j, kind in enumerate(kinds):
        values = np.unique(matrix[:, j])
        if kind == "continuous" and values.size < points and values[-1] > values[0]:
            values = np.union1d(values, np.linspace(values[0], values[-1], points))
        axes.append(values)
    if len(axes) == 1:
        return axes[0] if z_grid.ndim == 1 else axes[0][:, None]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def t_process(curve, boot_curve, z_grid):
    """Bootstrap t statistics and their extremes over the grid

    t_B(z) = sqrt(n) b_B(z)'(beta_B^b - beta_B) / sigma_B^b(z), with sigma^b
    the variance field of the reweighted fit. Points where the bootstrap
    variance is numerically zero are skipped with a warning. Returns the
    infimum of t_L and the supremum of t_U over the remaining points.

    :param curve: sample fit
    :type curve: BoundsCurve
    :param boot_curve: reweighted fit of the same bases
    :type boot_curve: BoundsCurve
    :param z_grid: evaluation points
    :type z_grid: numpy.ndarray
    :returns: t process of this replication
    :rtype: TStatistics
    """
    z_grid = np.asarray(z_grid, dtype=float)
    if z_grid.shape[0] == 0:
        raise ValueError("t process needs a non-empty grid")
    root_n = np.sqrt(curve.n)
    field = variance_field(boot_curve, z_grid)
    shift_L = curve.basis_at(z_grid, "lower") @ (boot_curve.beta_L - curve.beta_L)
    shift_U = curve.basis_at(z_grid, "upper") @ (boot_curve.beta_U - curve.beta_U)
    keep = ~field.floored
    t_L = np.where(keep, root_n * shift_L / field.sigma_L, np.nan)
    t_U = np.where(keep, root_n * shift_U / field.sigma_U, np.nan)
    skipped = int((~keep).sum())
    if skipped:
        emit_warning(logger, "skipped %d grid points with zero bootstrap variance", skipped)
    if skipped == keep.size:
        return TStatistics(t_L=t_L, t_U=t_U, inf_L=np.nan, sup_U=np.nan, skipped=skipped)
    return TStatistics(t_L=t_L, t_U=t_U, inf_L=float(np.nanmin(t_L)), sup_U=float(np.nanmax(t_U)), skipped=skipped)
