import numpy as np
import pytest
from scipy.special import ndtri

from conftest import constant_nuisance, make_table
from hetbounds_python.config import ScoreConfig
from hetbounds_python.orthogonality_check import orthogonality_check

LITERAL_GLOBAL = ScoreConfig(correction="literal", normalization="global")
ORTHOGONAL_GLOBAL = ScoreConfig(normalization="global")


def test_zero_step_is_zero(shifted_normal_sample):
    table, nuisance = shifted_normal_sample
    assert orthogonality_check(table, nuisance, None, 0.0, "s0") == 0.0


@pytest.mark.parametrize("direction", ["s0", "s1", "q"])
def test_orthogonal_score_is_locally_insensitive(shifted_normal_sample, direction):
    table, nuisance = shifted_normal_sample
    orthogonal = orthogonality_check(table, nuisance, None, 0.5, direction)
    naive = orthogonality_check(table, nuisance, None, 0.5, direction, naive=True)
    assert abs(naive) > 0.04
    assert abs(orthogonal) < 0.025


def test_upper_bound_is_locally_insensitive(shifted_normal_sample):
    table, nuisance = shifted_normal_sample
    assert abs(orthogonality_check(table, nuisance, None, 0.5, "q", bound="upper")) < 0.025


def test_custom_direction(shifted_normal_sample):
    table, nuisance = shifted_normal_sample
    by_name = orthogonality_check(table, nuisance, None, 0.5, "s0")
    by_dict = orthogonality_check(table, nuisance, None, 0.5, {"ds0": 0.05})
    assert by_dict == by_name


@pytest.mark.slow
@pytest.mark.parametrize("direction", ["s0", "s1", "q"])
def test_derivative_shrinks_with_step_on_roy_design(oracle_sample, direction):
    _, table, nuisance = oracle_sample
    steps = [1.0, 0.5, 0.25]
    orthogonal = [abs(orthogonality_check(table, nuisance, None, t, direction)) for t in steps]
    naive = [abs(orthogonality_check(table, nuisance, None, t, direction, naive=True)) for t in steps]
    assert max(orthogonal) < 0.05
    assert orthogonal[-1] < max(naive[-1], 0.02)


@pytest.fixture(scope="module")
def quadrature_sample():
    """Shifted-normal design with exact arm shares and outcomes on normal quantile midpoints.

    Sample means then equal population expectations up to O(1/m), so finite
    differences show the second-order remainder instead of sampling noise.
    """
    m = 40000
    unselected_treated = m // 4
    selected_control = 5 * m // 8
    d = np.concatenate([np.ones(m + unselected_treated), np.zeros(2 * selected_control)])
    s = np.concatenate([np.ones(m), np.zeros(unselected_treated), np.ones(selected_control), np.zeros(selected_control)])
    y = np.concatenate([
        2.0 + ndtri((np.arange(m) + 0.5) / m),
        np.zeros(unselected_treated),
        ndtri((np.arange(selected_control) + 0.5) / selected_control),
        np.zeros(selected_control),
    ])
    table = make_table(d.astype(int), s.astype(int), y)
    nuisance = constant_nuisance(d.size, 0.5, 0.8, lambda u: 2.0 + ndtri(u), lambda u: ndtri(u))
    return table, nuisance


@pytest.mark.parametrize(
    "direction, steps, ratio_range",
    [
        ({"dq": 1.0}, [0.4, 0.2, 0.1], (0.45, 0.57)),
        ({"ds1": -0.2}, [1.0, 0.5, 0.25], (0.25, 0.5)),
    ],
)
def test_orthogonal_derivative_halves_with_step(quadrature_sample, direction, steps, ratio_range):
    table, nuisance = quadrature_sample
    derivatives = [abs(orthogonality_check(table, nuisance, None, t, direction)) for t in steps]
    assert derivatives[-1] < 0.04
    lo, hi = ratio_range
    for larger, smaller in zip(derivatives, derivatives[1:]):
        assert lo < smaller / larger < hi


@pytest.mark.parametrize("config, bound", [(ORTHOGONAL_GLOBAL, (0.0, 0.03)), (LITERAL_GLOBAL, (0.5, 0.8))])
def test_literal_correction_is_first_order_in_s1(quadrature_sample, config, bound):
    table, nuisance = quadrature_sample
    derivative = abs(orthogonality_check(table, nuisance, None, 0.25, {"ds1": -0.2}, config=config))
    lo, hi = bound
    assert lo <= derivative < hi


def test_literal_derivative_does_not_vanish(quadrature_sample):
    table, nuisance = quadrature_sample
    coarse, fine = (
        abs(orthogonality_check(table, nuisance, None, t, {"ds1": -0.2}, config=LITERAL_GLOBAL)) for t in (0.5, 0.25)
    )
    assert fine / coarse > 0.75
