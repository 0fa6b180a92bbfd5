import dataclasses

import numpy as np
import pytest

from conftest import constant_nuisance, make_table

from hetbounds_python.classify_cells import classify_cells
from hetbounds_python.config import ScoreConfig
from hetbounds_python.errors import ScoreError
from hetbounds_python.personal_bounds import personal_bounds
from hetbounds_python.scores import compute_scores, score_components, score_lower, score_upper, scores_frame
from hetbounds_python.true_theta import true_theta

LITERAL_GLOBAL = ScoreConfig(correction="literal", normalization="global")


def _reindexed(nuisance, index):
    base = nuisance.exact_quantile
    return dataclasses.replace(
        nuisance,
        s0_hat=nuisance.s0_hat[index],
        s1_hat=nuisance.s1_hat[index],
        q1_grid=nuisance.q1_grid[index],
        q0_grid=nuisance.q0_grid[index],
        exact_quantile=lambda arm, levels, rows: base(arm, levels, index[np.asarray(rows)]),
    )


def test_literal_lower_score_of_unselected_treated_unit():
    table = make_table([1], [0], [0.0])
    nuisance = constant_nuisance(1, 0.4, 0.8, lambda u: np.full_like(u, 2.0))
    cells = classify_cells(nuisance)
    assert score_lower(table, nuisance, cells, LITERAL_GLOBAL) == pytest.approx([2.0])


def test_trimmed_contrast_of_selected_treated_unit():
    table = make_table([1], [1], [1.0])
    nuisance = constant_nuisance(1, 0.4, 0.8, lambda u: np.full_like(u, 2.0))
    parts = score_components(table, nuisance, classify_cells(nuisance), ScoreConfig(normalization="global"))
    assert parts["star"] == pytest.approx([2.0])
    assert parts["normalizer"] == pytest.approx([0.4])


def test_orthogonal_correction_vanishes_for_unselected_units():
    table = make_table([1, 0], [0, 0], [0.0, 0.0])
    nuisance = constant_nuisance(2, 0.4, 0.8, lambda u: np.full_like(u, 2.0), lambda u: np.zeros_like(u))
    cells = classify_cells(nuisance)
    parts = score_components(table, nuisance, cells, ScoreConfig(normalization="global"))
    assert parts["correction"] == pytest.approx([0.0, 0.0])


def test_minus_cell_without_control_quantiles():
    table = make_table([1, 0], [1, 1], [1.0, 0.5])
    nuisance = constant_nuisance(2, 0.5, 0.4, lambda u: u)
    with pytest.raises(ScoreError):
        compute_scores(table, nuisance)


def test_literal_minus_cell_uses_treated_quantile():
    table = make_table([1, 0], [1, 1], [1.0, 0.5])
    nuisance = constant_nuisance(2, 0.5, 0.4, lambda u: u)
    scores = compute_scores(table, nuisance, config=LITERAL_GLOBAL)
    assert np.all(np.isfinite(scores.psi_L))
    assert not scores.plus.any()


def test_non_finite_score_reports_components():
    table = make_table([1], [1], [1.0])
    nuisance = constant_nuisance(1, 0.4, 0.8, lambda u: np.full_like(u, 2.0))
    cells = dataclasses.replace(classify_cells(nuisance), mu10_plus=0.0)
    with pytest.raises(ScoreError, match="star="):
        score_lower(table, nuisance, cells, ScoreConfig(normalization="global"))


def test_tie_gives_finite_scores_at_extreme_levels():
    table = make_table([1, 0, 1], [1, 1, 0], [0.3, -0.2, 0.0])
    nuisance = constant_nuisance(3, 0.6, 0.6, lambda u: u, lambda u: u - 0.5)
    scores = compute_scores(table, nuisance)
    assert np.all(np.isfinite(scores.psi_L)) and np.all(np.isfinite(scores.psi_U))
    assert scores.level_lower == pytest.approx([0.99] * 3)
    assert scores.level_upper == pytest.approx([0.01] * 3)


def test_scores_are_permutation_equivariant(oracle_sample):
    _, table, nuisance = oracle_sample
    index = np.arange(3000)
    sub_table, sub_nuisance = table.subset(index), _reindexed(nuisance, index)
    scores = compute_scores(sub_table, sub_nuisance)
    order = np.random.default_rng(0).permutation(3000)
    permuted = compute_scores(sub_table.subset(order), _reindexed(sub_nuisance, order))
    np.testing.assert_allclose(permuted.psi_L, scores.psi_L[order], rtol=1e-12)
    np.testing.assert_allclose(permuted.psi_U, scores.psi_U[order], rtol=1e-12)


def test_score_means_bracket_average_effect(oracle_sample):
    config, table, nuisance = oracle_sample
    cells = classify_cells(nuisance)
    scores = compute_scores(table, nuisance, cells)
    se_L = scores.psi_L.std() / np.sqrt(table.n)
    se_U = scores.psi_U.std() / np.sqrt(table.n)
    theta_bar = np.mean(true_theta(table.x[:, 0], config))
    assert scores.psi_L.mean() - 3 * se_L <= theta_bar <= scores.psi_U.mean() + 3 * se_U

    lower, upper = personal_bounds(nuisance, cells)
    assert scores.psi_L.mean() == pytest.approx(lower.mean(), abs=4 * se_L + 0.002)
    assert scores.psi_U.mean() == pytest.approx(upper.mean(), abs=4 * se_U + 0.002)


def test_upper_and_lower_agree_with_compute_scores(oracle_sample):
    _, table, nuisance = oracle_sample
    index = np.arange(500)
    sub_table, sub_nuisance = table.subset(index), _reindexed(nuisance, index)
    cells = classify_cells(sub_nuisance)
    scores = compute_scores(sub_table, sub_nuisance, cells)
    np.testing.assert_array_equal(score_lower(sub_table, sub_nuisance, cells), scores.psi_L)
    np.testing.assert_array_equal(score_upper(sub_table, sub_nuisance, cells), scores.psi_U)


def test_scores_frame_layout():
    table = make_table([1, 0], [1, 1], [1.0, 0.5])
    nuisance = constant_nuisance(2, 0.4, 0.8, lambda u: u, lambda u: u)
    frame = scores_frame(compute_scores(table, nuisance))
    assert list(frame.columns) == ["unit", "psi_L", "psi_U", "cell", "level_lower", "level_upper"]
    assert frame["cell"].tolist() == ["plus", "plus"]
