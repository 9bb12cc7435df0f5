"""Training configuration for both models."""

from dataclasses import dataclass


@dataclass
class OptimConfig:
    """Settings for the logistic-regression trainers.

    optimizer: 'sgd' (constant step, optional momentum) or 'adagrad'
    (per-coordinate second-moment scaling).  mc_samples only matters for
    the reparameterization-trick trainer.
    """

    learning_rate: float = 0.05
    epochs: int = 100
    batch_size: int = 32
    optimizer: str = "adagrad"
    momentum: float = 0.0
    seed: int = 0
    mc_samples: int = 1
    tol: float = 1e-8  # VB-EM stopping threshold on bound improvement

    def validate(self, n_records=None):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if n_records is not None and self.batch_size > n_records:
            raise ValueError("batch_size exceeds dataset size")
        if self.optimizer not in ("sgd", "adagrad"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be >= 1")


@dataclass
class LvmConfig:
    """Settings for the session-model trainer.

    negatives: number of sampled items for the noisy partition term;
    0 (or >= catalog size) means the full partition function.
    """

    latent_dim: int = 8
    negatives: int = 0
    learning_rate: float = 0.1
    epochs: int = 50
    optimizer: str = "adagrad"
    momentum: float = 0.0
    seed: int = 0

    def validate(self, catalog_size=None):
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be >= 1")
        if self.negatives < 0:
            raise ValueError("negatives must be >= 0")
        if catalog_size is not None and self.negatives > catalog_size:
            raise ValueError("negatives exceeds catalog size")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.optimizer not in ("sgd", "adagrad"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
