"""Orthogonal pseudo-outcomes for the lower and upper effect bounds.

Each bound score is ``(star + correction) / normalizer + plug_in``:

* ``star`` is the inverse-propensity-weighted trimmed contrast: in PLUS cells
  the selected treated outcome is trimmed at its quantile, in MINUS cells the
  selected control outcome is.
* ``correction`` removes the first-order effect of quantile and selection
  errors. ``"literal"`` evaluates the original correction terms term by term;
  ``"orthogonal"`` uses the collapsed form q * (kept-share contrast), which is
  also first-order insensitive to the selection probabilities.
* ``normalizer`` is the cell mean of s(0, .) or s(1, .) (``"global"``), or the
  unit's own selection probability (``"local"``), in which case ``plug_in``
  corrects for the estimation error of that probability.
"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .classify_cells import classify_cells
from .config import ScoreConfig
from .errors import ScoreError
from .personal_bounds import personal_bounds
from .trimming_levels import trimming_levels

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
COMPONENTS = ("star", "correction", "normalizer", "plug_in")


@dataclass(frozen=True, eq=False)
class ScoreVector:
    """Per-unit pseudo-outcomes with the cell sign and trimming levels that produced them."""

    psi_L: np.ndarray
    psi_U: np.ndarray
    plus: np.ndarray
    level_lower: np.ndarray
    level_upper: np.ndarray

    @property
    def n(self):
        return self.psi_L.shape[0]

    def component(self, bound):
        return self.psi_L if bound == "lower" else self.psi_U

    def scaled(self, factor):
        return ScoreVector(
            psi_L=self.psi_L * factor,
            psi_U=self.psi_U * factor,
            plus=self.plus,
            level_lower=self.level_lower,
            level_upper=self.level_upper,
        )


class _Inputs:
    """Quantities shared by both bound scores."""

    def __init__(self, table, nuisance, cells, config):
        self.config = config
        self.cells = cells
        d = table.d_treat.astype(float)
        s = table.s_select.astype(float)
        e = table.propensity
        self.selected = table.s_select == 1
        self.y = table.y_selected
        self.a = d * s / e
        self.b = (1.0 - d) * s / (1.0 - e)
        self.b_literal = (1.0 - d) * s / e
        self.s0 = nuisance.s0_hat
        self.s1 = nuisance.s1_hat
        self.p0 = cells.p0
        self.plus = cells.plus
        self.levels = trimming_levels(cells, nuisance.grid, config.rounding)
        self.nuisance = nuisance
        self._theta = None

    def quantiles(self, levels):
        """Trimming quantile per unit: treated in PLUS cells, control or treated in MINUS cells."""
        q = self.nuisance.quantile_at(levels, arm=1)
        minus = ~self.plus
        if np.any(minus) and self.config.correction == "orthogonal":
            if self.nuisance.q0_grid is None and self.nuisance.exact_quantile is None:
                raise ScoreError("MINUS cells need selected-control quantiles (set control_quantiles)")
            rows = np.flatnonzero(minus)
            q = q.copy()
            q[rows] = self.nuisance.quantile_at(levels[rows], arm=0, rows=rows)
        return q

    def theta(self):
        if self._theta is None:
            self._theta = personal_bounds(self.nuisance, self.cells)
        return self._theta

    def le(self, q):
        return self.selected & (self.y <= q)

    def ge(self, q):
        return self.selected & (self.y >= q)


def _literal_lower(v, q, below):
    a, b, s0, s1, p0 = v.a, v.b, v.s0, v.s1, v.p0
    plus = q * (b - s0) - q * p0 * (a - s1) - q * s1 * (a * below / s1 - p0)
    minus = -q / p0 * (b - s0) + q * (a - s1) + q * s0 * (a * below / s0 + (1.0 - 1.0 / p0))
    return np.where(v.plus, plus, minus)


def _literal_upper(v, q, below):
    a, s0, s1, p0 = v.a, v.s0, v.s1, v.p0
    b = v.b_literal if v.config.alpha_u_propensity == "literal" else v.b
    plus = q * (b - s0) - q * p0 * (a - s1) + q * s1 * (a * below / s1 - (1.0 - p0))
    minus = q / p0 * (b - s0) + q * (a - s1) + q * s0 * (a * below / s0 - 1.0 / p0)
    return np.where(v.plus, plus, minus)


def _components(v, bound, naive=False):
    lower = bound == "lower"
    levels = v.levels.lower if lower else v.levels.upper
    q = v.quantiles(levels)
    ay, by = v.a * v.y, v.b * v.y

    if lower:
        # PLUS keeps treated below q; MINUS keeps control above q
        kept_plus, kept_minus = v.le(q), v.ge(q)
        star = np.where(v.plus, ay * kept_plus - by, ay - by * kept_minus)
    else:
        kept_plus, kept_minus = v.ge(q), v.le(q)
        star = np.where(v.plus, ay * kept_plus - by, ay - by * kept_minus)

    if naive:
        correction = np.zeros_like(star)
    elif v.config.correction == "orthogonal":
        correction = np.where(v.plus, q * (v.b - v.a * kept_plus), q * (v.b * kept_minus - v.a))
    elif lower:
        correction = _literal_lower(v, q, v.le(q))
    else:
        correction = _literal_upper(v, q, v.le(q))

    if v.config.normalization == "global":
        normalizer = np.where(
            v.plus,
            v.cells.mu10_plus if v.cells.mu10_plus is not None else np.nan,
            v.cells.mu11_minus if v.cells.mu11_minus is not None else np.nan,
        )
        plug_in = np.zeros_like(star)
    else:
        normalizer = np.where(v.plus, v.s0, v.s1)
        theta = v.theta()[0 if lower else 1]
        if naive:
            plug_in = np.zeros_like(star)
        else:
            plug_in = -theta * np.where(v.plus, (v.b - v.s0) / v.s0, (v.a - v.s1) / v.s1)
    return {"star": star, "correction": correction, "normalizer": normalizer, "plug_in": plug_in}


def combine_components(parts, bound):
    psi = (parts["star"] + parts["correction"]) / parts["normalizer"] + parts["plug_in"]
    bad = np.flatnonzero(~np.isfinite(psi))
    if bad.size:
        i = int(bad[0])
        breakdown = ", ".join(f"{name}={parts[name][i]!r}" for name in COMPONENTS)
        raise ScoreError(f"non-finite {bound} score at unit {i} ({bad.size} units in total): {breakdown}")
    return psi


def score_components(table, nuisance, cells, config=None, bound="lower", naive=False):
    """Named parts of one bound score per unit (see module docstring).

    With ``naive`` the correction and plug-in parts are zero, leaving the
    non-orthogonal trimmed contrast.
    """
    config = ScoreConfig() if config is None else config
    return _components(_Inputs(table, nuisance, cells, config), bound, naive=naive)


def score_lower(table, nuisance, cells, config=None):
    """Lower-bound pseudo-outcome psi_L per unit

    :param table: the sample
    :type table: ObservationTable
    :param nuisance: cross-fitted nuisances
    :type nuisance: NuisanceFit
    :param cells: cell classification of ``nuisance``
    :type cells: CellClassification
    :param config: score form, defaults to :class:`ScoreConfig`
    :type config: ScoreConfig
    :returns: psi_L
    :rtype: numpy.ndarray
    :examples: score_lower(table, nuisance, classify_cells(nuisance))
    """
    return combine_components(score_components(table, nuisance, cells, config, "lower"), "lower")


def score_upper(table, nuisance, cells, config=None):
    """Upper-bound pseudo-outcome psi_U per unit; arguments as :func:`score_lower`."""
    return combine_components(score_components(table, nuisance, cells, config, "upper"), "upper")


def compute_scores(table, nuisance, cells=None, config=None):
    """Both bound scores plus the cell signs and trimming levels

    :param table: the sample
    :type table: ObservationTable
    :param nuisance: cross-fitted nuisances
    :type nuisance: NuisanceFit
    :param cells: cell classification, computed from ``nuisance`` when omitted
    :type cells: CellClassification
    :param config: score form
    :type config: ScoreConfig
    :returns: the pseudo-outcomes
    :rtype: ScoreVector
    """
    config = ScoreConfig() if config is None else config
    cells = classify_cells(nuisance) if cells is None else cells
    inputs = _Inputs(table, nuisance, cells, config)
    psi_L = combine_components(_components(inputs, "lower"), "lower")
    psi_U = combine_components(_components(inputs, "upper"), "upper")
    logger.debug("scores: mean psi_L %.6g, mean psi_U %.6g", psi_L.mean(), psi_U.mean())
    return ScoreVector(
        psi_L=psi_L,
        psi_U=psi_U,
        plus=np.asarray(cells.plus),
        level_lower=inputs.levels.lower,
        level_upper=inputs.levels.upper,
    )


def scores_frame(scores):
    """Long table of scores: unit, psi_L, psi_U, cell, level_lower, level_upper."""
    return pd.DataFrame({
        "unit": np.arange(scores.n),
        "psi_L": scores.psi_L,
        "psi_U": scores.psi_U,
        "cell": np.where(scores.plus, "plus", "minus"),
        "level_lower": scores.level_lower,
        "level_upper": scores.level_upper,
    })
