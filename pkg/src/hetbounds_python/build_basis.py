import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.interpolate import BSpline

from .errors import ConfigurationError, ProjectionError, emit_warning

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
RANK_TOLERANCE = 1e-10
BASIS_KINDS = ("bspline", "indicator", "constant")


@dataclass(frozen=True)
class BasisSpec:
    """Unfitted description of a series basis.

    ``bspline`` applies a B-spline of the given order (degree + 1) with
    ``knots`` interior knots to every continuous column and indicators to every
    categorical column, combined by tensor products. ``indicator`` treats every
    column as categorical. ``constant`` is the intercept alone.
    """

    kind: str = "bspline"
    order: int = 4
    knots: int = 0
    categories: tuple | None = None

    def __post_init__(self):
        if self.kind not in BASIS_KINDS:
            raise ConfigurationError(f"unknown basis kind {self.kind!r}")
        if self.order < 1 or self.knots < 0:
            raise ConfigurationError(f"invalid spline order {self.order} or knot count {self.knots}")

    @property
    def label(self):
        if self.kind == "bspline":
            return f"bspline(order={self.order}, knots={self.knots})"
        return self.kind

    @property
    def nominal_k(self):
        """Dimension before rank checks for one continuous column."""
        if self.kind == "bspline":
            return self.order + self.knots
        if self.kind == "indicator" and self.categories is not None:
            return len(self.categories)
        return 1


@dataclass(frozen=True)
class Basis:
    """A basis fitted to a sample of Z: knot vectors, categories, kept columns."""

    spec: BasisSpec
    kinds: tuple
    knot_vectors: tuple
    categories: tuple
    keep: tuple
    design: np.ndarray

    @property
    def k(self):
        return len(self.keep)

    def evaluate(self, z_values):
        """Design rows at new points; continuous values are clamped to the fitted range."""
        z_values = _as_matrix(z_values)
        full = _tensor_design(z_values, self.spec, self.kinds, self.knot_vectors, self.categories)
        return full[:, list(self.keep)]

    def describe(self):
        return {
            "spec": self.spec.label,
            "k": self.k,
            "kinds": list(self.kinds),
            "knots": [None if t is None else [float(v) for v in t] for t in self.knot_vectors],
            "categories": [None if c is None else [float(v) for v in c] for c in self.categories],
        }


def _as_matrix(z_values):
    z_values = np.asarray(z_values, dtype=float)
    if z_values.ndim == 1:
        z_values = z_values[:, None]
    return z_values


def _spline_columns(x, knot_vector, order):
    lo, hi = knot_vector[0], knot_vector[-1]
    if hi <= lo:
        return np.ones((x.shape[0], 1))
    design = BSpline.design_matrix(np.clip(x, lo, hi), knot_vector, order - 1)
    return design.toarray()


def _indicator_columns(x, categories):
    columns = x[:, None] == np.asarray(categories)[None, :]
    unknown = ~columns.any(axis=1)
    if np.any(unknown):
        rows = np.flatnonzero(unknown)[:5].tolist()
        raise ProjectionError(f"values outside the declared categories at rows {rows}")
    return columns.astype(float)


def _tensor_design(z_values, spec, kinds, knot_vectors, categories):
    n = z_values.shape[0]
    design = np.ones((n, 1))
    if spec.kind == "constant":
        return design
    for j, kind in enumerate(kinds):
        if kind == "categorical" or spec.kind == "indicator":
            marginal = _indicator_columns(z_values[:, j], categories[j])
        else:
            marginal = _spline_columns(z_values[:, j], knot_vectors[j], spec.order)
        design = (design[:, :, None] * marginal[:, None, :]).reshape(n, -1)
    return design


def _knot_vector(x, spec):
    lo, hi = float(np.min(x)), float(np.max(x))
    interior = np.quantile(x, np.linspace(0.0, 1.0, spec.knots + 2)[1:-1]) if spec.knots else np.empty(0)
    interior = np.unique(interior[(interior > lo) & (interior < hi)])
    return np.concatenate([np.repeat(lo, spec.order), interior, np.repeat(hi, spec.order)])


def build_basis(z_values, spec, kinds=None):
    """Series basis of the heterogeneity variables

    Builds the design matrix of a basis on the sample ``z_values``: B-spline
    columns on [min, max] of each continuous column with interior knots at
    empirical quantiles, indicator columns for categorical columns, and
    row-wise tensor products across columns. Splines and indicators are
    partitions of unity, so the intercept is spanned exactly once. Columns
    that a pivoted QR finds linearly dependent are dropped with a warning.

    :param z_values: sample of Z, shape (n,) or (n, q)
    :type z_values: numpy.ndarray
    :param spec: basis description
    :type spec: BasisSpec
    :param kinds: ``"continuous"`` or ``"categorical"`` per column; all continuous by default
    :type kinds: tuple
    :returns: fitted basis whose ``design`` attribute is the n x k_B design matrix
    :rtype: Basis
    :examples: build_basis(np.linspace(0, 1, 100), BasisSpec("bspline", order=4, knots=3)).k
    """
    z_values = _as_matrix(z_values)
    if not np.all(np.isfinite(z_values)):
        raise ProjectionError("heterogeneity values must be finite")
    n, q = z_values.shape
    kinds = tuple(kinds) if kinds is not None else ("continuous",) * q
    if len(kinds) != q:
        raise ProjectionError(f"{len(kinds)} column kinds given for {q} heterogeneity columns")

    knot_vectors = []
    categories = []
    for j, kind in enumerate(kinds):
        indicator = kind == "categorical" or spec.kind == "indicator"
        if indicator:
            declared = spec.categories if (spec.categories is not None and q == 1) else None
            levels = np.unique(z_values[:, j]) if declared is None else np.asarray(declared, dtype=float)
            categories.append(tuple(float(v) for v in levels))
            knot_vectors.append(None)
        else:
            categories.append(None)
            knot_vectors.append(_knot_vector(z_values[:, j], spec) if spec.kind == "bspline" else None)

    full = _tensor_design(z_values, spec, kinds, knot_vectors, categories)
    keep = tuple(range(full.shape[1]))
    if full.shape[1] > 1 and n >= 1:
        _, r_factor, pivots = scipy.linalg.qr(full, mode="economic", pivoting=True)
        diagonal = np.abs(np.diag(r_factor))
        rank = int(np.sum(diagonal > RANK_TOLERANCE * diagonal[0])) if diagonal.size else 0
        if rank < full.shape[1]:
            keep = tuple(sorted(int(p) for p in pivots[:rank]))
            emit_warning(
                logger, "basis %s is rank deficient on the sample: dropped columns %s",
                spec.label, sorted(int(p) for p in pivots[rank:]),
            )
    return Basis(
        spec=spec,
        kinds=kinds,
        knot_vectors=tuple(knot_vectors),
        categories=tuple(categories),
        keep=keep,
        design=full[:, list(keep)],
    )
