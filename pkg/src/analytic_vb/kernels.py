"""Scalar kernels shared by every bound: stable logistic functions, the
quadratic lower-bound coefficients for the Bernoulli log-likelihood, the
log-sum-exp upper bound, and the Gaussian KL divergence."""

import numpy as np

from .linalg import CovFactor

__all__ = [
    "log1pexp",
    "sigmoid",
    "jj_A",
    "jj_C",
    "jj_quad_upper",
    "lambda_jj",
    "bouchard_lse_upper",
    "gaussian_kl",
]

# Below this threshold the direct formulas for jj_A / lambda_jj hit 0/0;
# switch to their quadratic Taylor expansion (error ~ z**4 / 30, far below
# double precision at 1e-4).
_SERIES_CUTOFF = 1e-4


def log1pexp(x):
    """Numerically stable log(1 + e^x), elementwise."""
    x = np.asarray(x, dtype=float)
    out = np.where(x > 0, x + np.log1p(np.exp(-np.abs(x))), np.log1p(np.exp(np.minimum(x, 0.0))))
    if out.ndim == 0:
        return float(out)
    return out


def sigmoid(x):
    """Stable logistic function 1 / (1 + e^-x)."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    if out.ndim == 0:
        return float(out)
    return out


def _check_nonneg(z, name):
    if np.any(np.asarray(z) < 0):
        raise ValueError(f"{name} must be nonnegative")


def jj_A(zeta):
    """Quadratic coefficient -tanh(z/2)/(4z) of the logistic lower bound.

    Continuous at 0 with limit -1/8; always in [-1/8, 0).
    """
    _check_nonneg(zeta, "zeta")
    z = np.asarray(zeta, dtype=float)
    small = z < _SERIES_CUTOFF
    zs = np.where(small, 1.0, z)  # avoid 0/0 in the masked-out branch
    out = np.where(small, -0.125 + z * z / 96.0, -np.tanh(zs / 2.0) / (4.0 * zs))
    if out.ndim == 0:
        return float(out)
    return out


def jj_C(zeta):
    """Constant term z/2 - log(1+e^z) + z*tanh(z/2)/4 of the logistic bound."""
    _check_nonneg(zeta, "zeta")
    z = np.asarray(zeta, dtype=float)
    out = z / 2.0 - log1pexp(z) + z * np.tanh(z / 2.0) / 4.0
    if np.ndim(out) == 0:
        return float(out)
    return out


def jj_quad_upper(m, v, zeta):
    """Quadratic upper bound on E[log(1+e^Z)] for Z ~ N(m, v).

    Equals log(1+e^m) exactly when v = 0 and zeta = |m| (the tangency
    point); otherwise strictly larger.
    """
    if np.any(np.asarray(v) < 0):
        raise ValueError("variance v must be nonnegative")
    _check_nonneg(zeta, "zeta")
    m = np.asarray(m, dtype=float)
    out = m / 2.0 - jj_A(zeta) * (m * m + v) - jj_C(zeta)
    if np.ndim(out) == 0:
        return float(out)
    return out


def lambda_jj(xi):
    """Quadratic-slack coefficient (sigma(x) - 1/2) / (2x) of the
    log-sum-exp upper bound.

    Continuous at 0 with limit 1/8; always in (0, 1/8].
    """
    _check_nonneg(xi, "xi")
    x = np.asarray(xi, dtype=float)
    small = x < _SERIES_CUTOFF
    xs = np.where(small, 1.0, x)
    out = np.where(small, 0.125 - x * x / 96.0, (sigmoid(xs) - 0.5) / (2.0 * xs))
    if out.ndim == 0:
        return float(out)
    return out


def bouchard_lse_upper(logits, a, xi):
    """Upper bound on logsumexp(logits) with location a and slacks xi.

    Returns a + sum_p [(x_p - a - xi_p)/2 + lambda(xi_p)((x_p - a)^2 - xi_p^2)
    + log(1 + e^{xi_p})].  Dominates logsumexp for every a and xi >= 0.
    """
    logits = np.asarray(logits, dtype=float)
    xi = np.asarray(xi, dtype=float)
    _check_nonneg(xi, "xi")
    d = logits - a
    terms = (d - xi) / 2.0 + lambda_jj(xi) * (d * d - xi * xi) + log1pexp(xi)
    return float(a + np.sum(terms))


def gaussian_kl(mu_q, cov_q: CovFactor, mu_p, cov_p: CovFactor):
    """KL(N(mu_q, cov_q) || N(mu_p, cov_p)) in nats; always >= 0."""
    mu_q = np.asarray(mu_q, dtype=float)
    mu_p = np.asarray(mu_p, dtype=float)
    if mu_q.shape != mu_p.shape:
        raise ValueError("mean dimension mismatch")
    d = mu_q.size
    delta = mu_p - mu_q
    return 0.5 * (
        cov_p.logdet()
        - cov_q.logdet()
        + cov_p.trace_solve(cov_q)
        + cov_p.inv_quad(delta)
        - d
    )
