"""Softmax cross-entropy with its closed-form gradient."""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from ..core.tensor import Tensor
from ..errors import DimensionError, InputError

Labels = Union[Sequence[int], np.ndarray]


def cross_entropy(logits: Tensor, labels: Labels) -> tuple[float, Tensor]:
    """Mean negative log-softmax at the label indices.

    Returns ``(loss, dlogits)`` where ``dlogits = (softmax - one_hot) / B`` has
    the dtype of ``logits``.

    Raises:
        InputError: a label is outside ``[0, C)``.
        DimensionError: logits are not ``[B, C]`` or the batch sizes differ.
    """
    if logits.ndim != 2:
        raise DimensionError(f"logits must be [B, C], got {logits.shape}")
    batch, classes = logits.shape
    idx = np.asarray(labels, dtype=np.int64).reshape(-1)
    if idx.shape[0] != batch:
        raise DimensionError(f"{idx.shape[0]} labels for a batch of {batch}")
    bad = idx[(idx < 0) | (idx >= classes)]
    if bad.size:
        raise InputError(f"labels {sorted(set(bad.tolist()))} outside [0, {classes})")

    z = logits.numpy().astype(np.float64)
    shifted = z - z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    rows = np.arange(batch)
    loss = float(-log_probs[rows, idx].mean())

    grad = np.exp(log_probs)
    grad[rows, idx] -= 1.0
    grad /= batch
    return loss, Tensor(grad, dtype=logits.dtype)


def accuracy(logits: Tensor, labels: Labels) -> float:
    """Fraction of rows whose arg-max equals the label."""
    pred = np.argmax(logits.numpy(), axis=1)
    return float(np.mean(pred == np.asarray(labels).reshape(-1)))
