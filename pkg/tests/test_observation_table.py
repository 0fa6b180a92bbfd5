import numpy as np
import pytest

from hetbounds_python.errors import OverlapError, SchemaError
from hetbounds_python.observation_table import HeterogeneitySpec, ObservationTable


def _table(**overrides):
    values = dict(
        x=np.array([[0.1, 1.0], [0.2, 2.0], [0.3, 3.0], [0.4, 4.0]]),
        d_treat=[1, 0, 1, 0],
        s_select=[1, 1, 0, 0],
        y_obs=[1.5, -0.5, np.nan, 7.0],
        propensity=[0.5, 0.5, 0.5, 0.5],
    )
    values.update(overrides)
    return ObservationTable(**values)


def test_arrays_are_read_only_copies():
    x = np.zeros((4, 2))
    table = _table(x=x)
    x[0, 0] = 9.0
    assert table.x[0, 0] == 0.0
    with pytest.raises(ValueError):
        table.y_obs[0] = 1.0


def test_unselected_outcomes_are_ignored():
    table = _table()
    assert table.y_selected.tolist() == [1.5, -0.5, 0.0, 0.0]
    assert table.columns == ("x1", "x2")
    assert (table.n, table.d) == (4, 2)


def test_invalid_codes_name_rows():
    with pytest.raises(SchemaError, match=r"\[2\]"):
        _table(d_treat=[1, 0, 2, 0])


def test_selected_unit_without_outcome():
    with pytest.raises(SchemaError, match=r"\[1\]"):
        _table(y_obs=[1.5, np.nan, 0.0, 0.0])


def test_non_finite_covariates():
    x = np.ones((4, 2))
    x[3, 1] = np.nan
    with pytest.raises(SchemaError, match=r"\[3\]"):
        _table(x=x)


def test_overlap_band():
    with pytest.raises(OverlapError, match=r"\[0\]"):
        _table(propensity=[0.005, 0.5, 0.5, 0.5])


def test_subset_keeps_columns():
    table = _table().subset(np.array([3, 0]))
    assert table.n == 2
    assert table.d_treat.tolist() == [0, 1]
    assert table.columns == ("x1", "x2")


def test_heterogeneity_spec():
    table = _table()
    spec = HeterogeneitySpec.from_names(table, ["x2"], ["continuous"])
    assert spec.z_values(table)[:, 0].tolist() == [1.0, 2.0, 3.0, 4.0]
    with pytest.raises(SchemaError):
        HeterogeneitySpec.from_names(table, ["age"], ["continuous"])
    with pytest.raises(SchemaError):
        HeterogeneitySpec(columns=(0,), kinds=("ordinal",))
    with pytest.raises(SchemaError):
        HeterogeneitySpec(columns=(5,), kinds=("continuous",)).z_values(table)


def _factor_table():
    return _table(factors=("region",), factor_levels=(("a", "b", "c"),), factor_codes=[2, 0, 1, 2])


def test_factor_resolves_to_level_codes():
    table = _factor_table()
    spec = HeterogeneitySpec.from_names(table, ["region", "x1"], ["categorical", "continuous"])
    assert spec.columns == ("region", 0)
    np.testing.assert_array_equal(spec.z_values(table), [[2.0, 0.1], [0.0, 0.2], [1.0, 0.3], [2.0, 0.4]])
    assert spec.levels(table) == {"region": ["a", "b", "c"]}
    assert table.subset(np.array([1, 3])).factor_codes[:, 0].tolist() == [0, 2]


def test_factor_must_be_categorical():
    with pytest.raises(SchemaError, match="categorical"):
        HeterogeneitySpec.from_names(_factor_table(), ["region"], ["continuous"])


def test_factor_codes_outside_levels():
    with pytest.raises(SchemaError, match=r"\[1\]"):
        _table(factors=("region",), factor_levels=(("a", "b"),), factor_codes=[0, 2, 1, 1])
