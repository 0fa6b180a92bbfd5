from dataclasses import dataclass

import numpy as np
import pandas as pd
import scipy.linalg

from .variance_field import variance_field


@dataclass(frozen=True, eq=False)
class BoundsCurve:
    """Coefficients of both bound regressions with the pieces needed for the sandwich variance.

    ``r_L`` and ``r_U`` are triangular factors with R'R = sum_i w_i b(Z_i) b(Z_i)'.
    """

    beta_L: np.ndarray
    beta_U: np.ndarray
    basis_L: object
    basis_U: object
    resid_L: np.ndarray
    resid_U: np.ndarray
    r_L: np.ndarray
    r_U: np.ndarray
    weights: np.ndarray | None = None

    @property
    def n(self):
        return self.resid_L.shape[0]

    def design(self, bound):
        return self.basis_L.design if bound == "lower" else self.basis_U.design

    def coef(self, bound):
        return self.beta_L if bound == "lower" else self.beta_U

    def basis_at(self, z, bound):
        basis = self.basis_L if bound == "lower" else self.basis_U
        return basis.evaluate(z)

    def gram_solve(self, rhs, bound):
        """Q^-1 rhs with Q = (1/n) sum w b b'; ``rhs`` has shape (k, m)."""
        r_factor = self.r_L if bound == "lower" else self.r_U
        half = scipy.linalg.solve_triangular(r_factor, rhs, trans="T")
        return self.n * scipy.linalg.solve_triangular(r_factor, half)

    def theta(self, z):
        """(theta_L(z), theta_U(z)) at the points ``z``."""
        return self.basis_at(z, "lower") @ self.beta_L, self.basis_at(z, "upper") @ self.beta_U

    def evaluate(self, z):
        """Bounds and variance field on ``z`` as a table with columns theta_L, theta_U, sigma_L, sigma_U, rho."""
        theta_L, theta_U = self.theta(z)
        field = variance_field(self, z)
        return pd.DataFrame({
            "theta_L": theta_L,
            "theta_U": theta_U,
            "sigma_L": field.sigma_L,
            "sigma_U": field.sigma_U,
            "rho": field.rho,
        })

    def describe(self):
        return {
            "basis_L": self.basis_L.describe(),
            "basis_U": self.basis_U.describe(),
            "beta_L": [float(b) for b in self.beta_L],
            "beta_U": [float(b) for b in self.beta_U],
        }
