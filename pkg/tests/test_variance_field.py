import numpy as np
import pytest

from hetbounds_python.build_basis import BasisSpec, build_basis
from hetbounds_python.errors import HetBoundsWarning
from hetbounds_python.project import project
from hetbounds_python.scores import ScoreVector
from hetbounds_python.variance_field import RHO_LIMIT, variance_field


def _curve(z, psi_L, psi_U, spec):
    n = len(psi_L)
    psi = ScoreVector(
        psi_L=np.asarray(psi_L, dtype=float),
        psi_U=np.asarray(psi_U, dtype=float),
        plus=np.ones(n, dtype=bool),
        level_lower=np.full(n, 0.5),
        level_upper=np.full(n, 0.5),
    )
    basis = build_basis(z, spec)
    return project(psi, basis, basis)


def test_constant_basis_is_empirical_covariance():
    rng = np.random.default_rng(0)
    psi_L = rng.standard_normal(500)
    psi_U = 0.5 * psi_L + rng.standard_normal(500)
    field = variance_field(_curve(np.zeros(500), psi_L, psi_U, BasisSpec("constant")), np.array([0.3, 0.7]))
    cov = np.cov(psi_L, psi_U, bias=True)
    assert field.sigma_L == pytest.approx(np.full(2, np.sqrt(cov[0, 0])), rel=1e-9)
    assert field.sigma_U == pytest.approx(np.full(2, np.sqrt(cov[1, 1])), rel=1e-9)
    assert field.omega[0, 0, 1] == pytest.approx(cov[0, 1], rel=1e-9)
    assert field.omega[0, 1, 0] == field.omega[0, 0, 1]
    assert not field.floored.any()


def test_identical_scores_clip_correlation():
    rng = np.random.default_rng(1)
    z = rng.uniform(size=300)
    psi = z + rng.standard_normal(300)
    field = variance_field(_curve(z, psi, psi, BasisSpec("bspline", order=2, knots=0)), np.linspace(0, 1, 5))
    assert np.all(field.rho == RHO_LIMIT)
    np.testing.assert_allclose(field.sigma_L, field.sigma_U)


def test_independent_scores_are_uncorrelated():
    rng = np.random.default_rng(2)
    z = rng.uniform(size=4000)
    field = variance_field(
        _curve(z, rng.standard_normal(4000), rng.standard_normal(4000), BasisSpec("bspline", order=2, knots=0)),
        np.array([0.25, 0.5, 0.75]),
    )
    assert np.all(np.abs(field.rho) < 0.06)


def test_variance_grows_with_noise():
    rng = np.random.default_rng(3)
    z = rng.uniform(size=1000)
    noise = rng.standard_normal(1000)
    spec = BasisSpec("bspline", order=3, knots=1)
    grid = np.linspace(0.1, 0.9, 5)
    quiet = variance_field(_curve(z, noise, noise[::-1], spec), grid)
    loud = variance_field(_curve(z, 3 * noise, noise[::-1], spec), grid)
    np.testing.assert_allclose(loud.sigma_L, 3 * quiet.sigma_L, rtol=1e-9)
    np.testing.assert_allclose(loud.sigma_U, quiet.sigma_U, rtol=1e-9)


def test_exact_fit_is_floored_with_warning():
    z = np.linspace(0, 1, 100)
    curve = _curve(z, 1.0 + z, np.full(100, 2.0), BasisSpec("bspline", order=2, knots=0))
    with pytest.warns(HetBoundsWarning, match="floored"):
        field = variance_field(curve, np.array([0.2, 0.8]))
    assert field.floored.all()
    np.testing.assert_allclose(field.sigma_L, 1e-6)
