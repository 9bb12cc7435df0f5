"""Shared result containers and error types."""

from dataclasses import dataclass


@dataclass(frozen=True)
class BoundReport:
    """A bound value (nats) with its per-term breakdown.

    value = -kl_term + lik_term - partition_term.  For models without a
    separate partition function the partition term is 0.
    """

    value: float
    kl_term: float
    lik_term: float
    partition_term: float = 0.0


class DivergenceError(RuntimeError):
    """Raised when an optimizer produces a non-finite bound."""


class DatasetFormatError(ValueError):
    """Raised on malformed dataset files; message carries the line number."""
