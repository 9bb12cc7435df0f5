"""Multiclass latent-variable session model.

Each session u carries a latent factor omega_u ~ N(0, I) and emits items
from categorical(softmax(Psi omega_u + rho)).  A linear encoder maps the
session's normalized item counts to a diagonal Gaussian posterior and to
the location parameter of the log-sum-exp upper bound, so the integrated
likelihood has an analytical lower bound.  The partition term decomposes
over items, which admits an unbiased negative-sampled estimator with
P/S scaling.
"""

import time
from dataclasses import dataclass

import numpy as np

from .config import LvmConfig
from .kernels import lambda_jj, log1pexp, sigmoid
from .optim import AscentOptimizer
from .report import BoundReport, DivergenceError

__all__ = [
    "SessionDataset",
    "LinearEncoder",
    "LvmParams",
    "SessionPosterior",
    "encode",
    "xi_closed_form",
    "full_bound",
    "noisy_bound",
    "grad_noisy_bound",
    "fit",
    "score_items",
    "init_params",
    "flatten_params",
    "unflatten_params",
]

_LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class SessionDataset:
    sessions: list  # list of item-id sequences, each nonempty
    catalog_size: int

    def __post_init__(self):
        if self.catalog_size < 1:
            raise ValueError("catalog_size must be >= 1")
        if len(self.sessions) < 1:
            raise ValueError("need at least one session")
        cleaned = []
        for s in self.sessions:
            arr = np.asarray(s, dtype=int)
            if arr.ndim != 1 or arr.size < 1:
                raise ValueError("each session must be a nonempty id sequence")
            if np.any(arr < 0) or np.any(arr >= self.catalog_size):
                raise ValueError("item id out of range")
            cleaned.append(arr)
        object.__setattr__(self, "sessions", cleaned)

    @property
    def n_sessions(self):
        return len(self.sessions)


@dataclass
class LinearEncoder:
    W_mu: np.ndarray      # (K, P)
    b_mu: np.ndarray      # (K,)
    W_sigma: np.ndarray   # (K, P)
    b_sigma: np.ndarray   # (K,)
    w_a: np.ndarray       # (P,)
    b_a: float


@dataclass
class LvmParams:
    psi: np.ndarray  # (P, K) item embeddings
    rho: np.ndarray  # (P,) item biases
    encoder: LinearEncoder

    @property
    def catalog_size(self):
        return self.psi.shape[0]

    @property
    def latent_dim(self):
        return self.psi.shape[1]


@dataclass(frozen=True)
class SessionPosterior:
    mu: np.ndarray          # (K,)
    sigma_diag: np.ndarray  # (K,) variances, strictly positive
    a: float                # location parameter, >= 0 via softplus


def init_params(catalog_size, latent_dim, rng):
    """Psi ~ N(0, 1/K), rho = 0, encoder weights ~ N(0, 0.01), biases 0."""
    p, k = catalog_size, latent_dim
    return LvmParams(
        psi=rng.standard_normal((p, k)) / np.sqrt(k),
        rho=np.zeros(p),
        encoder=LinearEncoder(
            W_mu=0.1 * rng.standard_normal((k, p)),
            b_mu=np.zeros(k),
            W_sigma=0.1 * rng.standard_normal((k, p)),
            b_sigma=np.zeros(k),
            w_a=0.1 * rng.standard_normal(p),
            b_a=0.0,
        ),
    )


def _session_counts(session, catalog_size):
    """Unique item ids and their normalized counts."""
    arr = np.asarray(session, dtype=int)
    if arr.size < 1:
        raise ValueError("session must be nonempty")
    if np.any(arr < 0) or np.any(arr >= catalog_size):
        raise ValueError("item id out of range")
    items, counts = np.unique(arr, return_counts=True)
    return items, counts / arr.size, arr.size


def encode(session, params: LvmParams) -> SessionPosterior:
    """Linear encoding of the normalized item-count vector."""
    enc = params.encoder
    items, cvals, _ = _session_counts(session, params.catalog_size)
    mu = enc.W_mu[:, items] @ cvals + enc.b_mu
    h = enc.W_sigma[:, items] @ cvals + enc.b_sigma
    g = float(enc.w_a[items] @ cvals + enc.b_a)
    return SessionPosterior(mu=mu, sigma_diag=log1pexp(h), a=log1pexp(g))


def xi_closed_form(post: SessionPosterior, psi_p, rho_p):
    """Optimal slack sqrt(psi_p Sigma psi_p^T + (psi_p mu + rho_p - a)^2)."""
    psi_p = np.asarray(psi_p, dtype=float)
    if psi_p.shape != post.mu.shape:
        raise ValueError("embedding dimension mismatch")
    d = float(psi_p @ post.mu) + rho_p - post.a
    qv = float((psi_p * psi_p) @ post.sigma_diag)
    return float(np.sqrt(qv + d * d))


def _gauss_terms(post: SessionPosterior):
    """Prior cross-entropy plus entropy; equals -KL(q || N(0, I))."""
    k = post.mu.size
    cross = -0.5 * k * _LOG_2PI - 0.5 * (post.mu @ post.mu + np.sum(post.sigma_diag))
    entropy = 0.5 * (k * (_LOG_2PI + 1.0) + np.sum(np.log(post.sigma_diag)))
    return float(cross + entropy)


def _partition_terms(post, psi_rows, rho_rows):
    """Per-item contributions to the log-sum-exp upper bound (a excluded)."""
    x = psi_rows @ post.mu + rho_rows
    d = x - post.a
    qv = (psi_rows * psi_rows) @ post.sigma_diag
    xi = np.sqrt(qv + d * d)
    lam = lambda_jj(xi)
    return (d - xi) / 2.0 + lam * (d * d + qv - xi * xi) + log1pexp(xi)


def _session_pieces(session, params):
    post = encode(session, params)
    arr = np.asarray(session, dtype=int)
    pos = float(np.sum(params.psi[arr] @ post.mu + params.rho[arr]))
    return post, arr, pos


def full_bound(data: SessionDataset, params: LvmParams):
    """Exact lower bound on the integrated log-likelihood of all sessions."""
    gauss = 0.0
    pos = 0.0
    partition = 0.0
    for session in data.sessions:
        post, arr, pos_u = _session_pieces(session, params)
        gauss += _gauss_terms(post)
        pos += pos_u
        terms = _partition_terms(post, params.psi, params.rho)
        partition += arr.size * (post.a + float(np.sum(terms)))
    return BoundReport(
        value=gauss + pos - partition,
        kl_term=-gauss,
        lik_term=pos,
        partition_term=partition,
    )


def _check_negatives(negatives, catalog_size):
    neg = np.asarray(negatives, dtype=int)
    if neg.size < 1 or neg.size > catalog_size:
        raise ValueError("need 1 <= S <= P sampled items")
    if np.unique(neg).size != neg.size:
        raise ValueError("duplicate negative items")
    if np.any(neg < 0) or np.any(neg >= catalog_size):
        raise ValueError("negative item id out of range")
    return neg


def noisy_bound(session, negatives, n_sessions, catalog_size, params: LvmParams):
    """Per-session bound with the partition sum subsampled and P/S scaled.

    Averaged over uniform without-replacement subsets, and summed over the
    n_sessions sessions of the dataset, this equals full_bound exactly.
    """
    neg = _check_negatives(negatives, catalog_size)
    if n_sessions < 1:
        raise ValueError("n_sessions must be >= 1")
    post, arr, pos = _session_pieces(session, params)
    terms = _partition_terms(post, params.psi[neg], params.rho[neg])
    scale = catalog_size / neg.size
    partition = arr.size * (post.a + scale * float(np.sum(terms)))
    return _gauss_terms(post) + pos - partition


# ---------------------------------------------------------------------------
# Gradients.  The slack parameters xi sit at their closed-form optimum,
# where the objective's partial derivative in xi is exactly zero, so they
# are held constant.  The location parameter a is an encoder output and is
# differentiated through the softplus.

def _zero_grads(params: LvmParams):
    enc = params.encoder
    return LvmParams(
        psi=np.zeros_like(params.psi),
        rho=np.zeros_like(params.rho),
        encoder=LinearEncoder(
            W_mu=np.zeros_like(enc.W_mu),
            b_mu=np.zeros_like(enc.b_mu),
            W_sigma=np.zeros_like(enc.W_sigma),
            b_sigma=np.zeros_like(enc.b_sigma),
            w_a=np.zeros_like(enc.w_a),
            b_a=0.0,
        ),
    )


def grad_noisy_bound(session, negatives, n_sessions, catalog_size, params: LvmParams):
    """Gradient of noisy_bound wrt all free parameters, same shapes as params."""
    neg = _check_negatives(negatives, catalog_size)
    enc = params.encoder
    items, cvals, t_u = _session_counts(session, params.catalog_size)
    arr = np.asarray(session, dtype=int)
    pos_items, pos_counts = np.unique(arr, return_counts=True)

    # forward pass, keeping pre-softplus activations
    h = enc.W_sigma[:, items] @ cvals + enc.b_sigma
    g = float(enc.w_a[items] @ cvals + enc.b_a)
    mu = enc.W_mu[:, items] @ cvals + enc.b_mu
    sigma = log1pexp(h)
    a = log1pexp(g)

    psi_s = params.psi[neg]
    x = psi_s @ mu + params.rho[neg]
    d = x - a
    qv = (psi_s * psi_s) @ sigma
    xi = np.sqrt(qv + d * d)
    lam = lambda_jj(xi)

    scale = t_u * catalog_size / neg.size
    alpha = -scale * (0.5 + 2.0 * lam * d)   # d(bound)/d x_p
    beta = -scale * lam                      # d(bound)/d q_p

    grads = _zero_grads(params)

    # mean path
    g_mu = -mu + params.psi[pos_items].T @ pos_counts + psi_s.T @ alpha
    # variance path
    g_sigma = -0.5 + 0.5 / sigma + (psi_s * psi_s).T @ beta
    # location path: the -T_u * a term plus every d_p = x_p - a
    g_a = -float(t_u) - float(np.sum(alpha))

    # embeddings and biases
    np.add.at(grads.psi, pos_items, np.outer(pos_counts, mu))
    grads.psi[neg] += np.outer(alpha, mu) + 2.0 * psi_s * np.outer(beta, sigma)
    np.add.at(grads.rho, pos_items, pos_counts.astype(float))
    grads.rho[neg] += alpha

    # encoder, through the softplus transforms
    g_h = g_sigma * sigmoid(h)
    g_g = g_a * sigmoid(g)
    grads.encoder.W_mu[:, items] = np.outer(g_mu, cvals)
    grads.encoder.b_mu[:] = g_mu
    grads.encoder.W_sigma[:, items] = np.outer(g_h, cvals)
    grads.encoder.b_sigma[:] = g_h
    grads.encoder.w_a[items] = g_g * cvals
    grads.encoder.b_a = g_g
    return grads


def flatten_params(params: LvmParams):
    enc = params.encoder
    return np.concatenate([
        params.psi.ravel(), params.rho,
        enc.W_mu.ravel(), enc.b_mu,
        enc.W_sigma.ravel(), enc.b_sigma,
        enc.w_a, np.array([enc.b_a]),
    ])


def unflatten_params(theta, catalog_size, latent_dim):
    p, k = catalog_size, latent_dim
    sizes = [p * k, p, k * p, k, k * p, k, p, 1]
    if theta.size != sum(sizes):
        raise ValueError("flat parameter vector has wrong length")
    parts = np.split(np.asarray(theta, dtype=float), np.cumsum(sizes)[:-1])
    return LvmParams(
        psi=parts[0].reshape(p, k),
        rho=parts[1].copy(),
        encoder=LinearEncoder(
            W_mu=parts[2].reshape(k, p),
            b_mu=parts[3].copy(),
            W_sigma=parts[4].reshape(k, p),
            b_sigma=parts[5].copy(),
            w_a=parts[6].copy(),
            b_a=float(parts[7][0]),
        ),
    )


def _apply_step(params, grads, opt):
    theta = flatten_params(params)
    grad = flatten_params(grads)
    theta = opt.step(theta, grad)
    return unflatten_params(theta, params.catalog_size, params.latent_dim)


def fit(data: SessionDataset, config: LvmConfig):
    """Train by per-session gradient ascent on the (optionally noisy) bound.

    The per-epoch trace always reports the exact full bound.
    """
    config.validate(catalog_size=data.catalog_size)
    p = data.catalog_size
    s = config.negatives if 0 < config.negatives < p else 0  # 0 means full partition
    rng = np.random.default_rng(config.seed)
    params = init_params(p, config.latent_dim, rng)
    opt = AscentOptimizer(config.optimizer, config.learning_rate, config.momentum)
    all_items = np.arange(p)
    u = data.n_sessions
    t0 = time.perf_counter()
    trace = []
    for epoch in range(config.epochs):
        order = rng.permutation(u)
        for idx in order:
            session = data.sessions[idx]
            neg = rng.choice(p, size=s, replace=False) if s else all_items
            grads = grad_noisy_bound(session, neg, u, p, params)
            params = _apply_step(params, grads, opt)
        report = full_bound(data, params)
        if not np.isfinite(report.value):
            raise DivergenceError(f"bound became non-finite at epoch {epoch}")
        trace.append({
            "epoch": epoch,
            "bound": report.value,
            "kl_term": report.kl_term,
            "lik_term": report.lik_term,
            "wall_ms": (time.perf_counter() - t0) * 1000.0,
        })
    return params, trace


def score_items(session, params: LvmParams):
    """Logits Psi @ mu + rho under the encoded posterior mean."""
    post = encode(session, params)
    return params.psi @ post.mu + params.rho
