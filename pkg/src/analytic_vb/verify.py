"""Oracle-backed property suites behind the `verify` CLI command.

Each suite returns {check_name: {"pass": bool, ...details}} so the CLI
can emit a JSON report; the acceptance tests call the same functions.
"""

import numpy as np
from scipy.special import logsumexp

from . import logreg, oracle, sessions
from .kernels import bouchard_lse_upper, jj_quad_upper, log1pexp
from .linalg import CovFactor
from .logreg import GaussianVariational, LogRegDataset, LogRegPrior

__all__ = ["suite_bounds", "suite_gradients", "suite_unbiasedness", "run_suites"]

# Relative per-coordinate gradient agreement; coordinates smaller than
# the floor are compared absolutely (central differences bottom out near
# 1e-10 on O(1) objectives).
GRAD_RTOL = 1e-5
_GRAD_FLOOR = 1e-4


def _rel_err(g, fd):
    denom = np.maximum(np.maximum(np.abs(g), np.abs(fd)), _GRAD_FLOOR)
    return float(np.max(np.abs(g - fd) / denom))


def _random_q(rng, d):
    m = rng.standard_normal((d, d))
    lower = np.linalg.cholesky(0.3 * m @ m.T + 0.2 * np.eye(d))
    return GaussianVariational(rng.standard_normal(d), CovFactor("cholesky", lower))


def _random_logreg(rng, n, d):
    x = rng.standard_normal((n, d))
    y = (rng.random(n) < 0.5).astype(int)
    return LogRegDataset(x, y), LogRegPrior.standard(d)


def _random_lvm(rng, p, k):
    params = sessions.init_params(p, k, rng)
    params.rho[:] = 0.3 * rng.standard_normal(p)
    return params


def suite_bounds(trials=20, seed=1234):
    rng = np.random.default_rng(seed)
    out = {}

    grid = np.linspace(-20.0, 20.0, 1000)
    gap = np.abs(jj_quad_upper(grid, 0.0, np.abs(grid)) - log1pexp(grid))
    out["jj_tangency"] = {"pass": bool(np.max(gap) < 1e-12), "max_gap": float(np.max(gap))}

    worst = np.inf
    violations = 0
    for _ in range(1000):
        p = int(rng.integers(2, 17))
        logits = 3.0 * rng.standard_normal(p)
        a = float(rng.standard_normal())
        xi = np.abs(rng.standard_normal(p)) * 3.0
        margin = bouchard_lse_upper(logits, a, xi) - float(logsumexp(logits))
        worst = min(worst, margin)
        if margin < -1e-9:
            violations += 1
    out["bouchard_dominance"] = {"pass": violations == 0, "min_margin": worst, "violations": violations}

    spec = oracle.QuadratureSpec(nodes=41)
    worst = np.inf
    for _ in range(trials):
        d = int(rng.integers(1, 3))
        n = int(rng.integers(1, 51))
        data, prior = _random_logreg(rng, n, d)
        q = _random_q(rng, d)
        margin = oracle.quadrature_log_marginal(data, prior, spec) - logreg.elbo_jj(data, prior, q).value
        worst = min(worst, margin)
    out["elbo_le_log_marginal"] = {"pass": worst > -1e-6, "min_margin": worst}

    worst = np.inf
    for _ in range(trials):
        p = int(rng.integers(2, 5))
        params = _random_lvm(rng, p, 1)
        session = rng.integers(0, p, size=int(rng.integers(1, 6)))
        data = sessions.SessionDataset([session], p)
        margin = oracle.quadrature_lvm_loglik(session, params, spec) - sessions.full_bound(data, params).value
        worst = min(worst, margin)
    out["lvm_bound_le_loglik"] = {"pass": worst > -1e-6, "min_margin": worst}
    return out


def suite_gradients(trials=10, seed=99):
    rng = np.random.default_rng(seed)
    out = {}

    worst = 0.0
    for _ in range(trials):
        d, n = 3, 10
        data, prior = _random_logreg(rng, n, d)
        theta = logreg.free_from_q(_random_q(rng, d))
        g = logreg.grad_elbo_jj(data, prior, theta)
        fd = oracle.finite_diff_grad(
            lambda t: logreg.elbo_jj(data, prior, logreg.q_from_free(t, d)).value, theta
        )
        worst = max(worst, _rel_err(g, fd))
    out["logreg_grad_fd"] = {"pass": worst < GRAD_RTOL, "max_rel_err": worst}

    worst = 0.0
    for _ in range(trials):
        p, k = 5, 2
        params = _random_lvm(rng, p, k)
        session = rng.integers(0, p, size=4)
        neg = rng.choice(p, size=3, replace=False)
        theta = sessions.flatten_params(params)
        g = sessions.flatten_params(sessions.grad_noisy_bound(session, neg, 1, p, params))
        fd = oracle.finite_diff_grad(
            lambda t: sessions.noisy_bound(session, neg, 1, p, sessions.unflatten_params(t, p, k)), theta
        )
        worst = max(worst, _rel_err(g, fd))
    out["lvm_grad_fd"] = {"pass": worst < GRAD_RTOL, "max_rel_err": worst}
    return out


def suite_unbiasedness(seed=7):
    rng = np.random.default_rng(seed)
    out = {}

    worst = 0.0
    for n in (3, 4, 5):
        d = 2
        data, prior = _random_logreg(rng, n, d)
        q = _random_q(rng, d)
        full = logreg.elbo_jj(data, prior, q).value
        for b in range(1, n + 1):
            import itertools

            ests = [
                logreg.elbo_jj_minibatch(np.array(batch), data, prior, q)
                for batch in itertools.combinations(range(n), b)
            ]
            worst = max(worst, abs(float(np.mean(ests)) - full))
    out["minibatch_unbiased"] = {"pass": worst < 1e-10, "max_abs_gap": worst}

    worst = 0.0
    for p in (5, 6):
        k = 2
        params = _random_lvm(rng, p, k)
        n_sessions = 2
        data = sessions.SessionDataset(
            [rng.integers(0, p, size=int(rng.integers(1, 5))) for _ in range(n_sessions)], p
        )
        full = sessions.full_bound(data, params).value
        for s in range(1, p + 1):
            total = 0.0
            for session in data.sessions:
                total += oracle.enumerate_subset_expectation(
                    lambda subset: sessions.noisy_bound(session, subset, n_sessions, p, params), p, s
                )
            worst = max(worst, abs(total - full))
    out["negative_sampling_unbiased"] = {"pass": worst < 1e-10, "max_abs_gap": worst}
    return out


def run_suites(which="all"):
    suites = {
        "bounds": suite_bounds,
        "gradients": suite_gradients,
        "unbiasedness": suite_unbiasedness,
    }
    if which != "all":
        if which not in suites:
            raise ValueError(f"unknown suite {which!r}")
        suites = {which: suites[which]}
    report = {name: fn() for name, fn in suites.items()}
    ok = all(check["pass"] for suite in report.values() for check in suite.values())
    return ok, report
