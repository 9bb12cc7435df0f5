"""Dense covariance factors and seeded Gaussian sampling.

Covariances are carried either as a lower-triangular Cholesky factor
(full covariance) or as a vector of positive variances (diagonal).  All
downstream code goes through the CovFactor interface so bounds never
form explicit inverses.

Randomness: numpy's PCG64 via ``np.random.default_rng(seed)``.  It is a
named, seedable, portable generator; every stochastic routine in this
package takes an explicit seed or Generator.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = ["CovFactor", "cholesky", "quad_form", "sample_gaussian"]


@dataclass(frozen=True)
class CovFactor:
    """A positive-definite covariance, held in factored form.

    kind 'cholesky': ``factor`` is lower triangular with positive diagonal,
    covariance = L @ L.T.  kind 'diagonal': ``factor`` is the vector of
    (positive) variances.
    """

    kind: str
    factor: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.factor, dtype=float)
        object.__setattr__(self, "factor", f)
        if self.kind == "cholesky":
            if f.ndim != 2 or f.shape[0] != f.shape[1]:
                raise ValueError("cholesky factor must be square")
            if np.any(np.diag(f) <= 0):
                raise ValueError("cholesky factor needs a strictly positive diagonal")
        elif self.kind == "diagonal":
            if f.ndim != 1:
                raise ValueError("diagonal factor must be a vector")
            if np.any(f <= 0):
                raise ValueError("diagonal variances must be strictly positive")
        else:
            raise ValueError(f"unknown CovFactor kind {self.kind!r}")

    @property
    def dim(self):
        return self.factor.shape[0]

    @staticmethod
    def identity(d):
        return CovFactor("cholesky", np.eye(d))

    @staticmethod
    def from_diagonal(variances):
        return CovFactor("diagonal", np.asarray(variances, dtype=float))

    def cov(self):
        """Dense covariance matrix."""
        if self.kind == "cholesky":
            return self.factor @ self.factor.T
        return np.diag(self.factor)

    def logdet(self):
        if self.kind == "cholesky":
            return 2.0 * float(np.sum(np.log(np.diag(self.factor))))
        return float(np.sum(np.log(self.factor)))

    def quad(self, x):
        """x^T Sigma x (>= 0)."""
        x = self._check_dim(x)
        if self.kind == "cholesky":
            y = self.factor.T @ x
            return float(y @ y)
        return float(np.sum(self.factor * x * x))

    def inv_quad(self, x):
        """x^T Sigma^{-1} x (>= 0)."""
        x = self._check_dim(x)
        if self.kind == "cholesky":
            y = scipy.linalg.solve_triangular(self.factor, x, lower=True)
            return float(y @ y)
        return float(np.sum(x * x / self.factor))

    def trace_solve(self, other: "CovFactor"):
        """tr(Sigma^{-1} Sigma_other)."""
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        if self.kind == "diagonal":
            if other.kind == "diagonal":
                return float(np.sum(other.factor / self.factor))
            return float(np.sum(other.cov().diagonal() / self.factor))
        # solve L Y = other_cov, L^T Z = Y, take trace
        y = scipy.linalg.solve_triangular(self.factor, other.cov(), lower=True)
        z = scipy.linalg.solve_triangular(self.factor.T, y, lower=False)
        return float(np.trace(z))

    def sample(self, rng):
        """One draw of L @ eps with eps ~ N(0, I)."""
        eps = rng.standard_normal(self.dim)
        if self.kind == "cholesky":
            return self.factor @ eps
        return np.sqrt(self.factor) * eps

    def _check_dim(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected vector of length {self.dim}, got shape {x.shape}")
        return x


def cholesky(a):
    """Lower-triangular Cholesky factor of a symmetric PD matrix.

    Raises ValueError naming the failing pivot if the matrix is not
    positive definite.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.T, rtol=1e-10, atol=1e-12):
        raise ValueError("matrix must be symmetric")
    try:
        lower = scipy.linalg.cholesky(a, lower=True)
    except scipy.linalg.LinAlgError as exc:
        # scipy reports the 1-based order of the failing leading minor
        msg = str(exc)
        pivot = "".join(ch for ch in msg if ch.isdigit()) or "?"
        raise ValueError(f"matrix is not positive definite (failing pivot {pivot})") from exc
    return CovFactor("cholesky", lower)


def quad_form(x, s: CovFactor):
    """x^T Sigma x through the factor."""
    return s.quad(x)


def sample_gaussian(mu, s: CovFactor, rng):
    """mu + L @ eps, deterministic given the generator state."""
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (s.dim,):
        raise ValueError("mean dimension mismatch")
    return mu + s.sample(rng)
