"""Independent verification routines: tensor-product Gauss-Hermite
quadrature for exact (low-dimensional) marginals and moments, central
finite differences, and exhaustive subset enumeration.

Everything here is deliberately brute force and shares no code with the
bounds it checks.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import logsumexp

from .logreg import GaussianVariational, LogRegDataset, LogRegPrior

__all__ = [
    "QuadratureSpec",
    "quadrature_log_marginal",
    "quadrature_posterior_moments",
    "quadrature_lvm_loglik",
    "finite_diff_grad",
    "enumerate_subset_expectation",
    "gh_expectation",
    "exact_elbo_gh",
]

_MAX_DIM = 3


@dataclass(frozen=True)
class QuadratureSpec:
    nodes: int = 41  # per dimension; >= 31 for acceptance-grade runs

    def __post_init__(self):
        if self.nodes < 2:
            raise ValueError("need at least 2 quadrature nodes")


def _gh_grid(nodes, dim):
    """Tensor-product Gauss-Hermite nodes and log-weights."""
    z, w = np.polynomial.hermite.hermgauss(nodes)
    zz = np.array(list(itertools.product(z, repeat=dim)))
    logw = np.sum(np.array(list(itertools.product(np.log(w), repeat=dim))), axis=1)
    return zz, logw


def _prior_chol(prior: LogRegPrior):
    if prior.cov_beta.kind == "cholesky":
        return prior.cov_beta.factor
    return np.diag(np.sqrt(prior.cov_beta.factor))


def _bernoulli_loglik(data: LogRegDataset, betas):
    """Log-likelihood of the full dataset at each beta (rows of betas)."""
    act = betas @ data.X.T  # (n_points, N)
    # log p(y | m) = y m - log(1 + e^m)
    stable = np.where(act > 0, act + np.log1p(np.exp(-np.abs(act))), np.log1p(np.exp(np.minimum(act, 0.0))))
    return act @ data.y - np.sum(stable, axis=1)


def _log_gaussian(betas, mean, chol):
    d = mean.size
    diff = scipy.linalg.solve_triangular(chol, (betas - mean).T, lower=True)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    return -0.5 * (d * math.log(2.0 * math.pi) + logdet + np.sum(diff * diff, axis=0))


def _posterior_grid(data, prior, spec):
    """Gauss-Hermite grid re-centered on the posterior.

    A first prior-whitened pass locates the posterior; the final grid is
    whitened by an inflated estimate of its covariance, with importance
    correction for the reference Gaussian.  Returns per-point betas,
    log-quadrature-weights, and the log integrand lik * prior / reference.
    """
    d = data.dim
    if d > _MAX_DIM:
        raise ValueError(f"quadrature supports dimension <= {_MAX_DIM}")
    zz, logw = _gh_grid(spec.nodes, d)
    prior_chol = _prior_chol(prior)

    # pass 1: prior as reference, to locate the posterior bulk
    betas = prior.mu_beta + np.sqrt(2.0) * zz @ prior_chol.T
    loglik = _bernoulli_loglik(data, betas) if data.n else np.zeros(zz.shape[0])
    logp = logw + loglik
    p = np.exp(logp - logsumexp(logp))
    mean = p @ betas
    centered = betas - mean
    cov = centered.T @ (centered * p[:, None])

    # pass 2: reference N(mean, 2 cov + jitter), importance corrected
    ref_chol = np.linalg.cholesky(2.0 * cov + 1e-8 * np.eye(d))
    betas = mean + np.sqrt(2.0) * zz @ ref_chol.T
    loglik = _bernoulli_loglik(data, betas) if data.n else np.zeros(zz.shape[0])
    log_integrand = (
        loglik
        + _log_gaussian(betas, prior.mu_beta, prior_chol)
        - _log_gaussian(betas, mean, ref_chol)
    )
    return betas, logw, log_integrand, d


def quadrature_log_marginal(data: LogRegDataset, prior: LogRegPrior, spec: QuadratureSpec):
    """log integral of p(y | X, beta) N(beta; prior) d beta."""
    _, logw, log_integrand, d = _posterior_grid(data, prior, spec)
    return float(logsumexp(logw + log_integrand) - 0.5 * d * math.log(math.pi))


def quadrature_posterior_moments(data: LogRegDataset, prior: LogRegPrior, spec: QuadratureSpec):
    """Normalized posterior mean and covariance of beta."""
    betas, logw, log_integrand, _ = _posterior_grid(data, prior, spec)
    logp = logw + log_integrand
    p = np.exp(logp - logsumexp(logp))
    mean = p @ betas
    centered = betas - mean
    cov = centered.T @ (centered * p[:, None])
    return mean, cov


def quadrature_lvm_loglik(session, params, spec: QuadratureSpec):
    """Exact per-session integrated log-likelihood; scalar latent only."""
    if params.latent_dim != 1:
        raise ValueError("lvm quadrature supports latent dimension 1 only")
    arr = np.asarray(session, dtype=int)
    z, w = np.polynomial.hermite.hermgauss(spec.nodes)
    omega = np.sqrt(2.0) * z
    logits = np.outer(omega, params.psi[:, 0]) + params.rho  # (nodes, P)
    logprob = logits - logsumexp(logits, axis=1, keepdims=True)
    loglik = np.sum(logprob[:, arr], axis=1)
    return float(logsumexp(np.log(w) + loglik) - 0.5 * math.log(math.pi))


def finite_diff_grad(f, theta, step=1e-5):
    """Central-difference gradient (f(t+h e_i) - f(t-h e_i)) / 2h."""
    theta = np.asarray(theta, dtype=float)
    if step <= 0:
        raise ValueError("step must be positive")
    grad = np.empty(theta.size)
    for i in range(theta.size):
        hi = theta.copy()
        lo = theta.copy()
        hi[i] += step
        lo[i] -= step
        grad[i] = (f(hi) - f(lo)) / (2.0 * step)
    return grad


def enumerate_subset_expectation(estimator, catalog_size, subset_size):
    """Exact mean of estimator(subset) over all size-S subsets of [0, P)."""
    n_subsets = math.comb(catalog_size, subset_size)
    if n_subsets > 100_000:
        raise ValueError(f"refusing to enumerate {n_subsets} subsets")
    total = 0.0
    for subset in itertools.combinations(range(catalog_size), subset_size):
        total += estimator(np.array(subset, dtype=int))
    return total / n_subsets


def gh_expectation(f, mean, var, nodes=101):
    """E[f(Z)] for Z ~ N(mean, var), by 1-D Gauss-Hermite."""
    z, w = np.polynomial.hermite.hermgauss(nodes)
    pts = mean + math.sqrt(2.0 * var) * z if var > 0 else np.full_like(z, mean)
    return float(np.sum(w * f(pts)) / math.sqrt(math.pi))


def exact_elbo_gh(data: LogRegDataset, prior: LogRegPrior, q: GaussianVariational, nodes=101):
    """Exact (quadrature) ELBO at q: -KL + sum_n E[log sigma((2y-1) z_n)]."""
    from .kernels import gaussian_kl, log1pexp

    kl = gaussian_kl(q.mu_q, q.cov_q, prior.mu_beta, prior.cov_beta)
    total = 0.0
    for n in range(data.n):
        x = data.X[n]
        m = float(x @ q.mu_q)
        v = q.cov_q.quad(x)
        sign = 2.0 * data.y[n] - 1.0
        total += gh_expectation(lambda zz: -log1pexp(-sign * zz), m, v, nodes)
    return total - kl
