from dataclasses import dataclass

import numpy as np

from .errors import OverlapError, SchemaError


def _frozen(values, dtype):
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ObservationTable:
    """Units (X_i, D_i, S_i, Y_i S_i, e(X_i)) with covariate column names.

    Arrays are copied and made read-only on construction, so a table can be
    shared between worker threads. Outcomes of unselected units are kept as
    loaded but never read: :attr:`y_selected` zeroes them.

    Categorical covariates enter ``x`` as dummies; ``factor_codes`` keeps one
    integer code column per name in ``factors``, indexing ``factor_levels``.
    """

    x: np.ndarray
    d_treat: np.ndarray
    s_select: np.ndarray
    y_obs: np.ndarray
    propensity: np.ndarray
    columns: tuple = ()
    overlap_floor: float = 0.01
    factors: tuple = ()
    factor_levels: tuple = ()
    factor_codes: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        for name in ("d_treat", "s_select"):
            raw = np.asarray(getattr(self, name), dtype=float)
            bad = np.flatnonzero((raw != 0) & (raw != 1))
            if bad.size:
                raise SchemaError(f"{name} must be 0/1; offending rows {bad[:10].tolist()}")
        object.__setattr__(self, "x", _frozen(x, float))
        object.__setattr__(self, "d_treat", _frozen(self.d_treat, np.int8))
        object.__setattr__(self, "s_select", _frozen(self.s_select, np.int8))
        object.__setattr__(self, "y_obs", _frozen(self.y_obs, float))
        object.__setattr__(self, "propensity", _frozen(self.propensity, float))
        codes = np.empty((self.d_treat.shape[0], 0)) if self.factor_codes is None else np.asarray(self.factor_codes)
        if codes.ndim == 1:
            codes = codes[:, None]
        object.__setattr__(self, "factor_codes", _frozen(codes, np.int64))
        if not self.columns:
            object.__setattr__(self, "columns", tuple(f"x{j + 1}" for j in range(self.x.shape[1])))
        self.validate()

    @property
    def n(self):
        return self.d_treat.shape[0]

    @property
    def d(self):
        return self.x.shape[1]

    def dummy_columns(self, factor):
        """Names of the ``x`` columns holding the dummies of ``factor``."""
        levels = self.factor_levels[self.factors.index(factor)]
        return tuple(f"{factor}_{level}" for level in levels[1:])

    @property
    def y_selected(self):
        """Outcome with unselected entries replaced by zero."""
        return np.where(self.s_select == 1, np.nan_to_num(self.y_obs, nan=0.0), 0.0)

    def validate(self):
        n = self.d_treat.shape[0]
        for name in ("x", "s_select", "y_obs", "propensity"):
            if getattr(self, name).shape[0] != n:
                raise SchemaError(f"{name} has {getattr(self, name).shape[0]} rows, expected {n}")
        if len(self.columns) != self.x.shape[1]:
            raise SchemaError(f"{len(self.columns)} column names for {self.x.shape[1]} covariates")
        if self.factor_codes.shape != (n, len(self.factors)) or len(self.factor_levels) != len(self.factors):
            raise SchemaError(f"factor codes of shape {self.factor_codes.shape} do not match factors {list(self.factors)}")
        for j, (name, levels) in enumerate(zip(self.factors, self.factor_levels)):
            bad = np.flatnonzero((self.factor_codes[:, j] < 0) | (self.factor_codes[:, j] >= len(levels)))
            if bad.size:
                raise SchemaError(f"factor {name!r} has codes outside its {len(levels)} levels at rows {bad[:10].tolist()}")
        if not np.all(np.isfinite(self.x)):
            bad = np.flatnonzero(~np.all(np.isfinite(self.x), axis=1))
            raise SchemaError(f"missing or non-finite covariates at rows {bad[:10].tolist()}")
        selected = self.s_select == 1
        bad = np.flatnonzero(selected & ~np.isfinite(self.y_obs))
        if bad.size:
            raise SchemaError(f"selected units without a finite outcome at rows {bad[:10].tolist()}")
        floor = self.overlap_floor
        bad = np.flatnonzero(~((self.propensity >= floor) & (self.propensity <= 1.0 - floor)))
        if bad.size:
            raise OverlapError(
                f"propensity outside [{floor}, {1.0 - floor}] at rows {bad[:10].tolist()}"
            )

    def subset(self, index):
        """Table restricted to the rows in ``index`` (integer or boolean)."""
        return ObservationTable(
            x=self.x[index],
            d_treat=self.d_treat[index],
            s_select=self.s_select[index],
            y_obs=self.y_obs[index],
            propensity=self.propensity[index],
            columns=self.columns,
            overlap_floor=self.overlap_floor,
            factors=self.factors,
            factor_levels=self.factor_levels,
            factor_codes=self.factor_codes[index],
        )


@dataclass(frozen=True)
class HeterogeneitySpec:
    """Columns defining Z and whether each is continuous or categorical.

    An integer column indexes ``table.x``; a string names one of
    ``table.factors`` and contributes its level codes.
    """

    columns: tuple
    kinds: tuple

    def __post_init__(self):
        if not self.columns:
            raise SchemaError("heterogeneity specification needs at least one column")
        if len(self.kinds) != len(self.columns):
            raise SchemaError("one kind per heterogeneity column is required")
        for column, kind in zip(self.columns, self.kinds):
            if kind not in ("continuous", "categorical"):
                raise SchemaError(f"unknown heterogeneity kind {kind!r}")
            if isinstance(column, str) and kind != "categorical":
                raise SchemaError(f"factor {column!r} can only enter Z as categorical")

    def check(self, table):
        for column in self.columns:
            if isinstance(column, str):
                if column not in table.factors:
                    raise SchemaError(f"heterogeneity factor {column!r} is not a factor of the table")
            elif not 0 <= column < table.d:
                raise SchemaError(f"heterogeneity column {column} outside 0..{table.d - 1}")

    def z_values(self, table):
        """n x q matrix of Z values."""
        self.check(table)
        blocks = [
            table.factor_codes[:, table.factors.index(column)] if isinstance(column, str) else table.x[:, column]
            for column in self.columns
        ]
        return np.column_stack(blocks).astype(float)

    def levels(self, table):
        """Level labels of each factor column, keyed by name."""
        return {
            column: list(table.factor_levels[table.factors.index(column)])
            for column in self.columns
            if isinstance(column, str)
        }

    @classmethod
    def from_names(cls, table, names, kinds):
        """Resolve names against ``table.columns``, then against ``table.factors``."""
        lookup = {name: j for j, name in enumerate(table.columns)}
        missing = [name for name in names if name not in lookup and name not in table.factors]
        if missing:
            raise SchemaError(f"heterogeneity columns {missing} are not covariates of the table")
        return cls(columns=tuple(lookup.get(name, name) for name in names), kinds=tuple(kinds))
