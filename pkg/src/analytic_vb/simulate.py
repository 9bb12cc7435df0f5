"""Seeded data simulators and dataset file IO.

Logistic datasets are stored as CSV with header ``y,x0,...,x{D-1}``.
Session datasets are JSON lines, one ``{"user": int, "items": [...]}``
object per session, with a sidecar manifest ``{"P": int, "U": int}``.
"""

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .logreg import LogRegDataset
from .report import DatasetFormatError
from .sessions import SessionDataset

__all__ = [
    "SimLogRegSpec",
    "SimSessionSpec",
    "sim_logreg",
    "sim_sessions",
    "write_logreg_csv",
    "read_logreg_csv",
    "write_sessions",
    "read_sessions",
    "manifest_path_for",
]


@dataclass(frozen=True)
class SimLogRegSpec:
    n: int
    d: int
    seed: int = 0
    beta: np.ndarray | None = None  # None: draw beta* ~ N(0, I)

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be >= 1")
        if self.beta is not None and np.asarray(self.beta).shape != (self.d,):
            raise ValueError("provided beta has wrong length")


@dataclass(frozen=True)
class SimSessionSpec:
    u_train: int
    u_test: int
    p: int
    k_true: int
    mean_length: float = 9.0
    seed: int = 0

    def __post_init__(self):
        if self.u_train < 1 or self.p < 1 or self.k_true < 1:
            raise ValueError("u_train, p, k_true must be >= 1")
        if self.u_test < 0:
            raise ValueError("u_test must be >= 0")
        if self.mean_length <= 0:
            raise ValueError("mean_length must be positive")


def sim_logreg(spec: SimLogRegSpec):
    """X iid standard normal, y ~ Bernoulli(sigma(x beta*))."""
    rng = np.random.default_rng(spec.seed)
    x = rng.standard_normal((spec.n, spec.d))
    beta = rng.standard_normal(spec.d) if spec.beta is None else np.asarray(spec.beta, dtype=float)
    prob = 1.0 / (1.0 + np.exp(-(x @ beta)))
    y = (rng.random(spec.n) < prob).astype(int)
    return LogRegDataset(x, y), beta


def sim_sessions(spec: SimSessionSpec, psi_true=None):
    """Latent-factor session simulator, split into train/test by user.

    omega_u ~ N(0, I), session length 1 + Poisson(mean_length - 1), items
    iid categorical(softmax(Psi* omega_u)).  Psi* entries are N(0, 1/sqrt(K))
    unless an explicit matrix is injected via psi_true.
    """
    rng = np.random.default_rng(spec.seed)
    if psi_true is None:
        psi_true = rng.standard_normal((spec.p, spec.k_true)) * spec.k_true ** -0.25
    else:
        psi_true = np.asarray(psi_true, dtype=float)
        if psi_true.shape != (spec.p, spec.k_true):
            raise ValueError("psi_true has wrong shape")
    rho_true = np.zeros(spec.p)
    lam = max(spec.mean_length - 1.0, 0.0)

    def draw(count):
        sessions = []
        for _ in range(count):
            omega = rng.standard_normal(spec.k_true)
            t = 1 + rng.poisson(lam)
            logits = psi_true @ omega + rho_true
            prob = np.exp(logits - logits.max())
            prob /= prob.sum()
            sessions.append(rng.choice(spec.p, size=t, p=prob))
        return sessions

    train = SessionDataset(draw(spec.u_train), spec.p)
    test = SessionDataset(draw(spec.u_test), spec.p) if spec.u_test else None
    return train, test, (psi_true, rho_true)


# ---------------------------------------------------------------------------
# File formats

def write_logreg_csv(path, data: LogRegDataset):
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y"] + [f"x{j}" for j in range(data.dim)])
        for i in range(data.n):
            writer.writerow([int(data.y[i])] + [repr(float(v)) for v in data.X[i]])


def read_logreg_csv(path):
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError(f"{path}: line 1: empty file") from None
        header = [h.strip() for h in header]
        if not header or header[0] != "y":
            raise DatasetFormatError(f"{path}: line 1: header must start with 'y'")
        d = len(header) - 1
        if d < 1 or header[1:] != [f"x{j}" for j in range(d)]:
            raise DatasetFormatError(f"{path}: line 1: feature columns must be x0..x{{D-1}}")
        xs, ys = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != d + 1:
                raise DatasetFormatError(f"{path}: line {lineno}: expected {d + 1} fields, got {len(row)}")
            try:
                label = int(row[0].strip())
                feats = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise DatasetFormatError(f"{path}: line {lineno}: {exc}") from None
            if label not in (0, 1):
                raise DatasetFormatError(f"{path}: line {lineno}: label must be 0 or 1")
            ys.append(label)
            xs.append(feats)
    if not xs:
        raise DatasetFormatError(f"{path}: no records")
    return LogRegDataset(np.array(xs), np.array(ys))


def manifest_path_for(path):
    path = Path(path)
    return path.with_name(path.stem + ".manifest.json")


def write_sessions(path, data: SessionDataset, manifest_path=None):
    path = Path(path)
    with path.open("w") as fh:
        for user, items in enumerate(data.sessions):
            fh.write(json.dumps({"user": user, "items": [int(i) for i in items]}) + "\n")
    manifest = manifest_path or manifest_path_for(path)
    Path(manifest).write_text(json.dumps({"P": data.catalog_size, "U": data.n_sessions}) + "\n")


def read_sessions(path, manifest_path=None):
    path = Path(path)
    manifest = Path(manifest_path or manifest_path_for(path))
    try:
        meta = json.loads(manifest.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"{manifest}: line {exc.lineno}: {exc.msg}") from None
    if "P" not in meta:
        raise DatasetFormatError(f"{manifest}: line 1: manifest missing catalog size 'P'")
    sessions = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"{path}: line {lineno}: {exc.msg}") from None
            items = obj.get("items")
            if not isinstance(items, list) or not items:
                raise DatasetFormatError(f"{path}: line {lineno}: session needs a nonempty 'items' list")
            if not all(isinstance(i, int) for i in items):
                raise DatasetFormatError(f"{path}: line {lineno}: item ids must be integers")
            sessions.append(items)
    if not sessions:
        raise DatasetFormatError(f"{path}: no sessions")
    try:
        return SessionDataset(sessions, int(meta["P"]))
    except ValueError as exc:
        raise DatasetFormatError(f"{path}: {exc}") from None
