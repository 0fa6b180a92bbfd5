import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .build_basis import BasisSpec, build_basis
from .classify_cells import classify_cells
from .confidence_band import confidence_band
from .confidence_interval import confidence_interval
from .crossfit import crossfit
from .errors import ProjectionError, emit_warning
from .loocv_select import loocv_scores, loocv_select
from .make_folds import make_folds
from .project import project
from .run_bootstrap import run_bootstrap
from .scores import compute_scores

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CurveFit:
    """Everything computed up to the projected curves."""

    z_values: np.ndarray
    kinds: tuple
    z_grid: np.ndarray
    folds: object
    nuisance: object
    cells: object
    scores: object
    curve: object
    selection: dict
    frame: pd.DataFrame


@dataclass(frozen=True, eq=False)
class BoundsEstimate:
    """Result of one estimation run."""

    fit: CurveFit
    intervals: object
    bootstrap: object
    band: object
    summary: pd.DataFrame
    diagnostics: dict

    def intervals_frame(self):
        frame = self.fit.frame
        return pd.DataFrame({
            **grid_columns(self.fit.z_grid),
            "theta_L": frame["theta_L"].to_numpy(),
            "theta_U": frame["theta_U"].to_numpy(),
            "theta_star": self.intervals.theta_star,
            "ci_lo": self.intervals.ci_lo,
            "ci_hi": self.intervals.ci_hi,
            "c_hat": self.intervals.c_hat,
            "rho": self.intervals.rho,
        })

    def curves_frame(self):
        return pd.concat([pd.DataFrame(grid_columns(self.fit.z_grid)), self.fit.frame], axis=1)

    def bands_frame(self):
        if self.band is None:
            return None
        return pd.DataFrame({
            **grid_columns(self.band.z),
            "band_lo": self.band.band_lo,
            "band_hi": self.band.band_hi,
        })


def grid_columns(z_grid):
    """Column(s) z or z1, z2, ... of a grid."""
    z_grid = np.asarray(z_grid, dtype=float)
    if z_grid.ndim == 1:
        return {"z": z_grid}
    return {f"z{j + 1}": z_grid[:, j] for j in range(z_grid.shape[1])}


def resolve_grid(grid_spec, z_values, kinds):
    """Evaluation grid: the grid's points for continuous columns, observed levels for categorical ones."""
    z_values = np.asarray(z_values, dtype=float)
    matrix = z_values[:, None] if z_values.ndim == 1 else z_values
    axes = []
    for j, kind in enumerate(kinds):
        if kind == "categorical":
            axes.append(np.unique(matrix[:, j]))
        else:
            axes.append(grid_spec.resolve(matrix[:, j]))
    if len(axes) == 1:
        return axes[0]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def _select_bases(z_values, scores, kinds, settings):
    if settings.share_basis:
        lower = loocv_scores(z_values, scores.psi_L, settings.candidates, kinds)
        upper = loocv_scores(z_values, scores.psi_U, settings.candidates, kinds)
        totals = [a["score"] + b["score"] for a, b in zip(lower, upper)]
        finite = [(total, a["k"], index) for index, (total, a) in enumerate(zip(totals, lower)) if np.isfinite(total)]
        if not finite:
            raise ProjectionError("every basis candidate was disqualified by leave-one-out cross-validation")
        _, _, index = min(finite)
        spec_L = spec_U = settings.candidates[index]
        criteria = {"criterion_L": [r["score"] for r in lower], "criterion_U": [r["score"] for r in upper]}
        logger.info("selected shared basis %s", spec_L.label)
    else:
        spec_L = loocv_select(z_values, scores.psi_L, settings.candidates, kinds)
        spec_U = loocv_select(z_values, scores.psi_U, settings.upper_candidates, kinds)
        criteria = {}
    for bound, spec, candidates in (("lower", spec_L, settings.candidates), ("upper", spec_U, settings.upper_candidates)):
        if len(candidates) > 1 and spec.nominal_k >= max(c.nominal_k for c in candidates):
            emit_warning(logger, "%s bound selected the largest candidate basis %s; consider richer candidates", bound, spec.label)
    return spec_L, spec_U, criteria


def fit_curves(table, z_values, kinds, settings, z_grid, nuisance=None):
    """Projected bound curves of one sample

    Splits the sample into folds, cross-fits the nuisances (unless
    ``nuisance`` is given, e.g. the analytic ones of a simulation design),
    classifies cells, evaluates both scores, selects a basis per bound by
    leave-one-out cross-validation and projects the scores on it. The curves
    and their variance field are evaluated on ``z_grid``.

    :param table: the sample
    :type table: ObservationTable
    :param z_values: heterogeneity values, shape (n,) or (n, q)
    :type z_values: numpy.ndarray
    :param kinds: column kinds of Z
    :type kinds: tuple
    :param settings: estimator settings
    :type settings: EstimatorSettings
    :param z_grid: evaluation points
    :type z_grid: numpy.ndarray
    :param nuisance: precomputed nuisances, cross-fitted when None
    :type nuisance: NuisanceFit
    :returns: the fitted curves with intermediate results
    :rtype: CurveFit
    """
    kinds = tuple(kinds)
    folds = None
    if nuisance is None:
        folds = make_folds(table.n, settings.folds, settings.seed)
        nuisance = crossfit(table, folds, settings.learners)
    cells = classify_cells(nuisance)
    scores = compute_scores(table, nuisance, cells, settings.scores)
    spec_L, spec_U, criteria = _select_bases(z_values, scores, kinds, settings)
    basis_L = build_basis(z_values, spec_L, kinds)
    basis_U = basis_L if spec_U == spec_L else build_basis(z_values, spec_U, kinds)
    curve = project(scores, basis_L, basis_U)
    selection = {"lower": spec_L.label, "upper": spec_U.label, "k_L": basis_L.k, "k_U": basis_U.k, **criteria}
    return CurveFit(
        z_values=np.asarray(z_values, dtype=float),
        kinds=kinds,
        z_grid=np.asarray(z_grid, dtype=float),
        folds=folds,
        nuisance=nuisance,
        cells=cells,
        scores=scores,
        curve=curve,
        selection=selection,
        frame=curve.evaluate(z_grid),
    )


def summarize(fit, settings):
    """Unconditional bounds: the scores projected on a constant."""
    constant = build_basis(fit.z_values, BasisSpec("constant"), fit.kinds)
    curve = project(fit.scores, constant, constant)
    at = fit.z_values[:1]
    row = curve.evaluate(at).iloc[0]
    interval = confidence_interval(
        row["theta_L"], row["theta_U"], row["sigma_L"], row["sigma_U"], row["rho"],
        curve.n, settings.alpha, settings.inference,
    )
    root_n = np.sqrt(curve.n)
    return pd.DataFrame([{
        "n": curve.n,
        "theta_L": row["theta_L"],
        "theta_U": row["theta_U"],
        "se_L": row["sigma_L"] / root_n,
        "se_U": row["sigma_U"] / root_n,
        "rho": row["rho"],
        "ci_lo": interval.ci_lo[0],
        "ci_hi": interval.ci_hi[0],
        "c_hat": interval.c_hat[0],
        "alpha": settings.alpha,
    }])


def estimate_bounds(table, z_values, kinds, settings, z_grid, nuisance=None):
    """Heterogeneous bounds with pointwise intervals and optional uniform band

    Runs :func:`fit_curves`, attaches the misspecification-robust interval at
    every grid point, the unconditional summary row and, when
    ``settings.bootstrap_reps`` is positive, the multiplier-bootstrap band.

    :param table: the sample
    :type table: ObservationTable
    :param z_values: heterogeneity values
    :type z_values: numpy.ndarray
    :param kinds: column kinds of Z
    :type kinds: tuple
    :param settings: estimator settings
    :type settings: EstimatorSettings
    :param z_grid: evaluation points
    :type z_grid: numpy.ndarray
    :param nuisance: precomputed nuisances, cross-fitted when None
    :type nuisance: NuisanceFit
    :returns: estimates, intervals, band and diagnostics
    :rtype: BoundsEstimate
    :examples: estimate_bounds(table, z, ("continuous",), EstimatorSettings(), np.linspace(0, 1, 50)).intervals_frame()
    """
    fit = fit_curves(table, z_values, kinds, settings, z_grid, nuisance)
    frame = fit.frame
    intervals = confidence_interval(
        frame["theta_L"].to_numpy(), frame["theta_U"].to_numpy(),
        frame["sigma_L"].to_numpy(), frame["sigma_U"].to_numpy(), frame["rho"].to_numpy(),
        fit.curve.n, settings.alpha, settings.inference,
    )
    bootstrap = band = None
    if settings.bootstrap_reps > 0:
        bootstrap = run_bootstrap(
            fit.scores, fit.curve, fit.z_grid,
            reps=settings.bootstrap_reps, seed=settings.seed, kinds=fit.kinds, n_jobs=settings.n_jobs,
        )
        band = confidence_band(fit.curve, bootstrap, settings.alpha, fit.z_grid)
    diagnostics = {
        "nuisance": fit.nuisance.diagnostics,
        "cells": {
            "plus": int(np.sum(fit.cells.plus)),
            "minus": int(np.sum(fit.cells.minus)),
            "ties": int(fit.cells.ties),
        },
        "basis": {**fit.selection, **fit.curve.describe()},
        "crossed_bounds": int(np.sum(frame["theta_L"].to_numpy() > frame["theta_U"].to_numpy())),
    }
    return BoundsEstimate(
        fit=fit,
        intervals=intervals,
        bootstrap=bootstrap,
        band=band,
        summary=summarize(fit, settings),
        diagnostics=diagnostics,
    )
