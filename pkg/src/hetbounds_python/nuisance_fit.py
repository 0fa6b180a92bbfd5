import dataclasses
from dataclasses import dataclass, field

import numpy as np


def _interpolate_rows(grid, table, levels):
    """Row-wise linear interpolation of ``table`` (n x G) at one level per row, clamped to the grid."""
    levels = np.clip(np.asarray(levels, dtype=float), grid[0], grid[-1])
    upper = np.clip(np.searchsorted(grid, levels, side="right"), 1, grid.size - 1)
    lower = upper - 1
    span = grid[upper] - grid[lower]
    weight = (levels - grid[lower]) / span
    rows = np.arange(table.shape[0])
    return (1.0 - weight) * table[rows, lower] + weight * table[rows, upper]


@dataclass(frozen=True, eq=False)
class NuisanceFit:
    """Per-unit nuisance predictions plus fold bookkeeping.

    ``q1_grid[i, g]`` is the quantile at level ``grid[g]`` of the outcome of
    selected treated units with covariates X_i; ``q0_grid`` is its selected
    control counterpart or None. ``exact_quantile`` is set for analytic
    nuisances and maps (arm, levels, rows) to exact quantiles.
    """

    s0_hat: np.ndarray
    s1_hat: np.ndarray
    grid: np.ndarray
    q1_grid: np.ndarray
    q0_grid: np.ndarray | None = None
    learner_tag: str = ""
    folds: object = None
    models: tuple = ()
    diagnostics: dict = field(default_factory=dict)
    exact_quantile: object = None

    @property
    def n(self):
        return self.s0_hat.shape[0]

    def quantile_table(self, arm=1):
        table = self.q1_grid if arm == 1 else self.q0_grid
        if table is None:
            raise ValueError(f"no quantile predictions for arm {arm}")
        return table

    def quantile_at(self, levels, arm=1, rows=None):
        """Quantile of unit ``rows[i]`` at ``levels[i]``.

        Exact analytic quantiles are used when available, grid interpolation
        otherwise. ``rows`` defaults to all units.
        """
        rows = np.arange(self.n) if rows is None else np.asarray(rows)
        levels = np.broadcast_to(np.asarray(levels, dtype=float), rows.shape)
        if self.exact_quantile is not None:
            return np.asarray(self.exact_quantile(arm, levels, rows), dtype=float)
        return _interpolate_rows(self.grid, self.quantile_table(arm)[rows], levels)

    def quantile(self, u, x_row=None, fold=None, arm=1):
        """Quantile function of one unit evaluated at level(s) ``u``.

        ``x_row`` is a unit index. ``fold`` is accepted for symmetry with
        per-fold predictors and checked against the stored assignment.
        """
        if fold is not None and self.folds is not None and self.folds.fold_of[x_row] != fold:
            raise ValueError(f"unit {x_row} is not in fold {fold}")
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return self.quantile_at(u, arm=arm, rows=np.full(u.shape, x_row))

    def with_selection(self, s0_hat=None, s1_hat=None):
        """Copy with replaced selection probabilities."""
        return dataclasses.replace(
            self,
            s0_hat=self.s0_hat if s0_hat is None else np.asarray(s0_hat, dtype=float),
            s1_hat=self.s1_hat if s1_hat is None else np.asarray(s1_hat, dtype=float),
        )

    def shifted(self, ds0=0.0, ds1=0.0, dq=0.0):
        """Copy moved along a direction: additive shifts of s(0,.), s(1,.) and every quantile."""
        exact = self.exact_quantile
        if exact is not None and dq != 0.0:
            def exact(arm, levels, rows, _base=self.exact_quantile):
                return _base(arm, levels, rows) + dq

        return dataclasses.replace(
            self,
            s0_hat=self.s0_hat + ds0,
            s1_hat=self.s1_hat + ds1,
            q1_grid=self.q1_grid + dq,
            q0_grid=None if self.q0_grid is None else self.q0_grid + dq,
            exact_quantile=exact,
        )
