"""Variational Bayes with analytical bounds.

Trains a Bayesian logistic output layer (quadratic logistic bound) and a
latent-factor session model (log-sum-exp upper bound with a linear
variational encoder) using plain SGD, with quadrature and enumeration
oracles verifying every bound, gradient, and unbiasedness claim.
"""

from .config import LvmConfig, OptimConfig
from .kernels import (
    bouchard_lse_upper,
    gaussian_kl,
    jj_A,
    jj_C,
    jj_quad_upper,
    lambda_jj,
    log1pexp,
    sigmoid,
)
from .linalg import CovFactor, cholesky, quad_form, sample_gaussian
from .logreg import (
    GaussianVariational,
    LogRegDataset,
    LogRegPrior,
    elbo_jj,
    elbo_jj_minibatch,
    fit_lrt,
    fit_sgd_jj,
    fit_vbem,
    grad_elbo_jj,
    predict_proba,
    zeta_closed_form,
)
from .metrics import (
    evaluate,
    itemknn_baseline,
    pop_baseline,
    ranked_top_k,
    recall_at_k,
    tdcg_at_k,
)
from .report import BoundReport, DatasetFormatError, DivergenceError
from .sessions import (
    LinearEncoder,
    LvmParams,
    SessionDataset,
    SessionPosterior,
    encode,
    full_bound,
    grad_noisy_bound,
    noisy_bound,
    score_items,
    xi_closed_form,
)
from .simulate import (
    SimLogRegSpec,
    SimSessionSpec,
    read_logreg_csv,
    read_sessions,
    sim_logreg,
    sim_sessions,
    write_logreg_csv,
    write_sessions,
)

__version__ = "0.1.0"
