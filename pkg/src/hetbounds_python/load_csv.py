import logging
from pathlib import Path

import numpy as np
import pandas as pd

from .config import TableSchema
from .errors import OverlapError, SchemaError
from .observation_table import ObservationTable

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
ROLE_COLUMNS = ("d_treat", "s_select", "y_obs", "propensity")
FLOAT_FORMAT = "%.17g"


def _numeric(frame, column):
    return pd.to_numeric(frame[column], errors="coerce").to_numpy(dtype=float)


def _binary(frame, column):
    values = _numeric(frame, column)
    bad = np.flatnonzero(~np.isin(values, (0.0, 1.0)))
    if bad.size:
        rows = bad[:10].tolist()
        raise SchemaError(f"column {column!r} must be 0/1; offending rows {rows} (values {frame[column].iloc[rows].tolist()})")
    return values.astype(np.int8)


def load_csv(path, schema):
    """Load and validate an observation table

    Reads a delimited file with a header row, applies the column roles in
    ``schema``, expands categorical covariates into dummy columns (first level
    dropped) and validates codes, covariates and overlap. Outcomes of
    unselected rows are accepted and ignored.

    :param path: CSV file
    :type path: str or pathlib.Path
    :param schema: column roles
    :type schema: TableSchema
    :returns: the validated sample
    :rtype: ObservationTable
    :examples: load_csv("trial.csv", TableSchema("D", "S", "Y", covariates=("age",), propensity_value=0.5))
    """
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"data file {path} does not exist")
    frame = pd.read_csv(path, sep=schema.delimiter, float_precision="round_trip")

    if schema.propensity is None and schema.propensity_value is None:
        raise SchemaError("schema names neither a propensity column nor a constant propensity value")
    required = [schema.treatment, schema.selection, schema.outcome, *schema.covariates]
    if schema.propensity is not None:
        required.append(schema.propensity)
    missing = [column for column in required if column not in frame.columns]
    if missing:
        raise SchemaError(f"columns {missing} not found in {path}")

    d_treat = _binary(frame, schema.treatment)
    s_select = _binary(frame, schema.selection)
    y_obs = _numeric(frame, schema.outcome)

    if schema.propensity is not None:
        propensity = _numeric(frame, schema.propensity)
    else:
        propensity = np.full(len(frame), float(schema.propensity_value))
    outside = np.flatnonzero(~((propensity > 0.0) & (propensity < 1.0)))
    if outside.size:
        raise OverlapError(f"propensity outside (0, 1) at rows {outside[:10].tolist()}")

    blocks = []
    names = []
    factors = []
    factor_levels = []
    factor_codes = []
    incomplete = np.zeros(len(frame), dtype=bool)
    for column in schema.covariates:
        if column in schema.categorical:
            incomplete |= frame[column].isna().to_numpy()
            category = frame[column].astype("category")
            dummies = pd.get_dummies(category, prefix=column, drop_first=True, dtype=float)
            factors.append(column)
            factor_levels.append(tuple(str(level) for level in category.cat.categories))
            factor_codes.append(category.cat.codes.to_numpy())
            blocks.append(dummies.to_numpy())
            names.extend(str(name) for name in dummies.columns)
        else:
            values = _numeric(frame, column)
            incomplete |= ~np.isfinite(values)
            blocks.append(values[:, None])
            names.append(column)
    if np.any(incomplete):
        rows = np.flatnonzero(incomplete)
        raise SchemaError(f"missing covariates at rows {rows[:10].tolist()} ({rows.size} rows in total)")
    x = np.hstack(blocks) if blocks else np.empty((len(frame), 0))

    ignored = int(np.sum((s_select == 0) & np.isfinite(y_obs)))
    if ignored:
        logger.info("%d outcomes present where the selection indicator is 0; they are ignored", ignored)
    logger.info("loaded %d rows and %d covariate columns from %s", len(frame), x.shape[1], path)
    return ObservationTable(
        x=x,
        d_treat=d_treat,
        s_select=s_select,
        y_obs=y_obs,
        propensity=propensity,
        columns=tuple(names),
        overlap_floor=schema.overlap_floor,
        factors=tuple(factors),
        factor_levels=tuple(factor_levels),
        factor_codes=np.column_stack(factor_codes) if factor_codes else None,
    )


def write_csv(table, path):
    """Write ``table`` so that :func:`load_csv` with :func:`table_schema` reloads it exactly.

    Factors are written as one column of level labels in place of their dummies.
    """
    frame = pd.DataFrame(
        {
            "d_treat": table.d_treat,
            "s_select": table.s_select,
            "y_obs": table.y_obs,
            "propensity": table.propensity,
        }
    )
    schema = table_schema(table)
    for name in schema.covariates:
        if name in table.factors:
            j = table.factors.index(name)
            frame[name] = np.asarray(table.factor_levels[j], dtype=object)[table.factor_codes[:, j]]
        else:
            frame[name] = table.x[:, table.columns.index(name)]
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return Path(path)


def table_schema(table):
    """Schema matching the layout written by :func:`write_csv`."""
    dummies = {name: factor for factor in table.factors for name in table.dummy_columns(factor)}
    covariates = []
    for name in table.columns:
        name = dummies.get(name, name)
        if name not in covariates:
            covariates.append(name)
    covariates.extend(factor for factor in table.factors if factor not in covariates)
    clash = set(ROLE_COLUMNS) & set(covariates)
    if clash:
        raise SchemaError(f"covariate names {sorted(clash)} collide with role columns")
    return TableSchema(
        treatment="d_treat",
        selection="s_select",
        outcome="y_obs",
        propensity="propensity",
        covariates=tuple(covariates),
        categorical=tuple(table.factors),
        overlap_floor=table.overlap_floor,
    )
