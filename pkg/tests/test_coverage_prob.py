import numpy as np
import pytest
from scipy.special import ndtr

from hetbounds_python.coverage_prob import coverage_prob, event_probabilities
from hetbounds_python.errors import SolverError


def test_band_alone_has_nominal_coverage_at_zero_separation():
    _, p_b, _ = event_probabilities(1.0, 0.0, 0.0, 0.05)
    assert p_b == pytest.approx(0.95, abs=1e-10)


def test_large_critical_value_covers_everything():
    assert coverage_prob(8.0, 1.0, 0.3, 0.05) == pytest.approx(1.0, abs=1e-8)


def test_separated_bounds_reduce_to_one_sided_coverage():
    assert coverage_prob(1.645, 10.0, 0.0, 0.05) == pytest.approx(ndtr(1.645), abs=1e-4)


def test_literal_event_loses_half_the_mass_when_separated():
    assert coverage_prob(1.96, 20.0, 0.0, 0.05, event="literal") == pytest.approx(0.5, abs=1e-4)


def test_union_dominates_both_events():
    p_a, p_b, p_union = event_probabilities(1.8, 0.8, -0.4, 0.05)
    assert p_union >= max(p_a, p_b) - 1e-10
    assert p_union <= p_a + p_b + 1e-10


@pytest.mark.parametrize("c, delta, rho", [(1.7, 0.5, 0.0), (1.8, 2.0, 0.6), (1.9, 1.0, -0.7)])
def test_sobol_evaluator_agrees_with_quadrature(c, delta, rho):
    assert coverage_prob(c, delta, rho, 0.05, evaluator="qmc") == pytest.approx(
        coverage_prob(c, delta, rho, 0.05), abs=2e-3
    )


def test_coverage_increases_with_critical_value():
    values = [coverage_prob(c, 1.5, 0.2, 0.05) for c in (1.6, 1.7, 1.8, 1.9)]
    assert np.all(np.diff(values) > 0)


def test_nearly_perfect_correlation_uses_the_limit():
    assert 0.0 <= coverage_prob(1.8, 0.5, 1.0 - 1e-15, 0.05) <= 1.0


@pytest.mark.parametrize("rho, delta", [(1.0, 0.0), (-1.2, 0.0), (0.0, -0.1)])
def test_invalid_inputs_raise(rho, delta):
    with pytest.raises(SolverError):
        coverage_prob(1.8, delta, rho, 0.05)
