"""AdamW with decoupled weight decay, and learning-rate schedules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Collection, Mapping, Optional

import numpy as np

from ..constants import (
    DEFAULT_ADAM_EPS,
    DEFAULT_BETAS,
    DEFAULT_LR,
    DEFAULT_SCHEDULE,
    DEFAULT_SEED,
    DEFAULT_STEPS,
    DEFAULT_TOY_BATCH,
    DEFAULT_WEIGHT_DECAY,
)
from ..core.tensor import Tensor
from ..errors import ConfigurationError, DimensionError


class Schedule(str, Enum):
    CONSTANT = "constant"
    COSINE = "cosine"


@dataclass(frozen=True)
class TrainHyper:
    """Optimiser and run settings.

    ``lr`` may be 0, which freezes the weights; a negative ``lr`` is rejected.
    """

    lr: float = DEFAULT_LR
    betas: tuple[float, float] = DEFAULT_BETAS
    eps: float = DEFAULT_ADAM_EPS
    weight_decay: float = DEFAULT_WEIGHT_DECAY
    batch_size: int = DEFAULT_TOY_BATCH
    steps: int = DEFAULT_STEPS
    schedule: Schedule = Schedule(DEFAULT_SCHEDULE)
    warmup_steps: int = 0
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        object.__setattr__(self, "schedule", Schedule(self.schedule))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if not (self.lr >= 0 and math.isfinite(self.lr)):
            raise ConfigurationError(f"lr must be a finite value >= 0, got {self.lr}")
        if len(self.betas) != 2 or not all(0 <= b < 1 for b in self.betas):
            raise ConfigurationError(f"betas must be two values in [0, 1), got {self.betas}")
        if not self.eps > 0:
            raise ConfigurationError(f"eps must be > 0, got {self.eps}")
        if self.weight_decay < 0:
            raise ConfigurationError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.steps < 1:
            raise ConfigurationError(f"steps must be >= 1, got {self.steps}")
        if not 0 <= self.warmup_steps < self.steps:
            raise ConfigurationError(
                f"warmup_steps must be in [0, steps), got {self.warmup_steps} "
                f"for {self.steps} steps"
            )

    def lr_at(self, step: int) -> float:
        """Learning rate for 1-based ``step``.

        Linear warmup over ``warmup_steps``, then constant or half-cosine decay
        that stays above zero until after the final step.
        """
        if self.warmup_steps and step <= self.warmup_steps:
            return self.lr * step / self.warmup_steps
        if self.schedule is Schedule.CONSTANT:
            return self.lr
        span = self.steps - self.warmup_steps
        progress = (step - self.warmup_steps - 1) / span
        return self.lr * 0.5 * (1.0 + math.cos(math.pi * min(progress, 1.0)))


@dataclass(frozen=True)
class AdamState:
    """First and second moments per parameter name, and the number of steps taken."""

    step: int = 0
    m: Mapping[str, np.ndarray] = field(default_factory=dict)
    v: Mapping[str, np.ndarray] = field(default_factory=dict)


def adamw_step(
    weights: Mapping[str, Tensor],
    grads: Mapping[str, Tensor],
    state: AdamState,
    hyper: TrainHyper,
    step_index: int,
    lr: Optional[float] = None,
    decay: Optional[Collection[str]] = None,
) -> tuple[dict[str, Tensor], AdamState]:
    """One AdamW update; returns new weights and state, inputs are not modified.

    Per parameter, with ``t = step_index``::

        w <- w - lr * wd * w                     (names in ``decay`` only)
        m <- b1 m + (1 - b1) g ;  v <- b2 v + (1 - b2) g^2
        w <- w - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)

    ``decay`` defaults to every parameter with two or more dimensions, which
    leaves biases and norm affine vectors undecayed. ``lr`` defaults to
    ``hyper.lr_at(step_index)``. Arithmetic is float64; results are cast back
    to each weight's dtype.
    """
    if step_index < 1:
        raise ConfigurationError(f"step_index must be >= 1, got {step_index}")
    if set(weights) != set(grads):
        raise DimensionError("weights and grads name different parameters")
    rate = hyper.lr_at(step_index) if lr is None else lr
    b1, b2 = hyper.betas
    c1 = 1.0 - b1**step_index
    c2 = 1.0 - b2**step_index
    decayed = (
        {name for name, w in weights.items() if w.ndim >= 2} if decay is None else set(decay)
    )

    new_weights: dict[str, Tensor] = {}
    new_m: dict[str, np.ndarray] = {}
    new_v: dict[str, np.ndarray] = {}
    for name, w in weights.items():
        g_t = grads[name]
        if g_t.shape != w.shape:
            raise DimensionError(f"{name}: grad shape {g_t.shape} != weight shape {w.shape}")
        p = w.numpy().astype(np.float64)
        g = g_t.numpy().astype(np.float64)
        m = state.m.get(name, np.zeros_like(p))
        v = state.v.get(name, np.zeros_like(p))
        if name in decayed and hyper.weight_decay:
            p = p - rate * hyper.weight_decay * p
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        p = p - rate * (m / c1) / (np.sqrt(v / c2) + hyper.eps)
        new_weights[name] = Tensor(p, dtype=w.dtype)
        new_m[name] = m
        new_v[name] = v
    return new_weights, AdamState(step=step_index, m=new_m, v=new_v)
