"""Estimator-style front end: ``fit(source)`` assembles, ``predict(X)`` evaluates U."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .assembly import AnnulusDomain, Resolution, assemble_solution
from .sphere import MEAN_TOL
from .validation import check_points, check_source
from .verify import fd_divergence


class AnnulusDivergenceSolver(BaseEstimator):
    """Solve div U = f on ``r1 < |x| < r2`` with U = 0 on the boundary.

    Parameters
    ----------
    n : int
        Ambient dimension, 2 or 3.
    r1, r2 : float
        Inner and outer radius.
    band : int or None
        Spherical band limit (L on S^2, K on S^1); None uses 32 / 64.
    radial_nodes : int
        Gauss-Legendre nodes for radial moments.
    fd_step : float or None
        Finite-difference step used by :meth:`divergence` and :meth:`score`.
    mean_tol : float
        Relative tolerance on the source's annulus mean.

    Examples
    --------
    >>> solver = AnnulusDivergenceSolver(n=2, r1=1.0, r2=2.0, band=16, radial_nodes=32)
    >>> U = solver.fit("harmonic_radial").predict([[1.5, 0.0]])
    >>> U.shape
    (1, 2)
    """

    def __init__(self, n=3, r1=1.0, r2=2.0, band=None, radial_nodes=64, fd_step=None, mean_tol=MEAN_TOL):
        self.n = n
        self.r1 = r1
        self.r2 = r2
        self.band = band
        self.radial_nodes = radial_nodes
        self.fd_step = fd_step
        self.mean_tol = mean_tol

    def fit(self, source, y=None):
        """Assemble the solution for ``source`` (catalog kind, dict or SourceSpec)."""
        domain = AnnulusDomain(self.n, self.r1, self.r2)
        self.source_ = check_source(source, domain.n, domain.r1, domain.r2)
        res = Resolution(self.band, self.radial_nodes, self.fd_step)
        self.solution_ = assemble_solution(self.source_, domain, res, mean_tol=self.mean_tol)
        self.domain_ = domain
        self.n_features_in_ = domain.n
        return self

    def predict(self, X):
        check_is_fitted(self, "solution_")
        return self.solution_(check_points(X, self.n_features_in_))

    def divergence(self, X):
        """Finite-difference divergence of the fitted field at ``X``."""
        check_is_fitted(self, "solution_")
        X = check_points(X, self.n_features_in_)
        return fd_divergence(self.solution_, X, self.solution_.resolution.fd_step, self.domain_)

    def score(self, X, y=None):
        """Negative sup-norm divergence residual, relative to ``max |f|`` at ``X``."""
        X = check_points(X, self.n)
        f = self.source_(X)
        scale = float(np.max(np.abs(f))) or 1.0
        return -float(np.max(np.abs(self.divergence(X) - f))) / scale
