"""Versioned JSON checkpoints with base64-encoded float64 arrays.

The header (kind, dims, seed, config) is human-inspectable; parameter
arrays are little-endian 64-bit floats so round-trips are bit exact.
"""

import base64
import json
from pathlib import Path

import numpy as np

from .linalg import CovFactor
from .logreg import GaussianVariational
from .sessions import LinearEncoder, LvmParams

FORMAT_VERSION = 1

__all__ = [
    "save_logreg_checkpoint",
    "save_lvm_checkpoint",
    "load_checkpoint",
    "FORMAT_VERSION",
]


def _encode_array(arr):
    arr = np.ascontiguousarray(np.asarray(arr, dtype="<f8"))
    return {"shape": list(arr.shape), "data": base64.b64encode(arr.tobytes()).decode("ascii")}


def _decode_array(obj):
    raw = base64.b64decode(obj["data"])
    return np.frombuffer(raw, dtype="<f8").astype(float).reshape(obj["shape"])


def _write(path, payload):
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n")


def save_logreg_checkpoint(path, q: GaussianVariational, seed, config=None):
    arrays = {"mu_q": _encode_array(q.mu_q), "cov_factor": _encode_array(q.cov_q.factor)}
    _write(path, {
        "format_version": FORMAT_VERSION,
        "model_kind": "jj_logreg",
        "dims": {"d": q.dim},
        "cov_kind": q.cov_q.kind,
        "seed": seed,
        "params": arrays,
        "config": config or {},
    })


def save_lvm_checkpoint(path, params: LvmParams, seed, config=None):
    enc = params.encoder
    arrays = {
        "psi": _encode_array(params.psi),
        "rho": _encode_array(params.rho),
        "W_mu": _encode_array(enc.W_mu),
        "b_mu": _encode_array(enc.b_mu),
        "W_sigma": _encode_array(enc.W_sigma),
        "b_sigma": _encode_array(enc.b_sigma),
        "w_a": _encode_array(enc.w_a),
        "b_a": _encode_array(np.array([enc.b_a])),
    }
    _write(path, {
        "format_version": FORMAT_VERSION,
        "model_kind": "bouchard_lvm",
        "dims": {"p": params.catalog_size, "k": params.latent_dim},
        "seed": seed,
        "params": arrays,
        "config": config or {},
    })


def load_checkpoint(path):
    """Returns (model_kind, model, metadata dict)."""
    payload = json.loads(Path(path).read_text())
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format version {version!r}")
    kind = payload["model_kind"]
    arrays = {name: _decode_array(obj) for name, obj in payload["params"].items()}
    if kind == "jj_logreg":
        factor = arrays["cov_factor"]
        cov = CovFactor(payload.get("cov_kind", "cholesky"), factor)
        model = GaussianVariational(arrays["mu_q"], cov)
    elif kind == "bouchard_lvm":
        model = LvmParams(
            psi=arrays["psi"],
            rho=arrays["rho"],
            encoder=LinearEncoder(
                W_mu=arrays["W_mu"],
                b_mu=arrays["b_mu"],
                W_sigma=arrays["W_sigma"],
                b_sigma=arrays["b_sigma"],
                w_a=arrays["w_a"],
                b_a=float(arrays["b_a"][0]),
            ),
        )
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    meta = {k: payload.get(k) for k in ("dims", "seed", "config")}
    return kind, model, meta
