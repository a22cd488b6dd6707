"""Wall-clock timing of full training steps."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ...modules.logging import python_logging_framework as plog
from ..constants import DEFAULT_SEED, DEFAULT_TIMED_ITERS, DEFAULT_WARMUP_ITERS, MIN_TIMED_ITERS
from ..core.tensor import DType, Tensor
from ..errors import ConfigurationError
from ..model.config import ViTConfig
from ..model.vit import init_weights, weight_layout
from ..training.optimizer import AdamState, TrainHyper
from ..training.trainer import training_step

logger = plog.get_logger(__name__)


@dataclass(frozen=True)
class TpsResult:
    """Time per training batch over the timed iterations."""

    mean_ms: float
    std_ms: float
    samples_ms: tuple[float, ...]
    batch_size: int

    @property
    def per_sample_ms(self) -> float:
        return self.mean_ms / self.batch_size


def measure_tps(
    cfg: ViTConfig,
    batch_size: int,
    warmup_iters: int = DEFAULT_WARMUP_ITERS,
    timed_iters: int = DEFAULT_TIMED_ITERS,
    seed: int = DEFAULT_SEED,
    hyper: Optional[TrainHyper] = None,
    timer: Callable[[], float] = time.perf_counter,
    dtype: DType | str = DType.F32,
) -> TpsResult:
    """Mean and sample standard deviation of a forward + backward + AdamW step.

    The batch is random data drawn from ``seed``; warmup iterations run the
    same step but are not timed. Steps run on the calling thread only.
    """
    if timed_iters < MIN_TIMED_ITERS:
        raise ConfigurationError(f"timed_iters must be >= {MIN_TIMED_ITERS}, got {timed_iters}")
    if warmup_iters < 0 or batch_size < 1:
        raise ConfigurationError("warmup_iters must be >= 0 and batch_size >= 1")
    hyper = hyper or TrainHyper(batch_size=batch_size, seed=seed)
    rng = np.random.default_rng(seed)
    images = Tensor(
        rng.standard_normal((batch_size, cfg.in_channels, cfg.image_size, cfg.image_size)),
        dtype=dtype,
    )
    labels = np.arange(batch_size) % cfg.num_classes
    weights = init_weights(cfg, seed, dtype)
    decay = {spec.name for spec in weight_layout(cfg) if spec.decay}
    state = AdamState()

    samples: list[float] = []
    for it in range(warmup_iters + timed_iters):
        started = timer()
        _, weights, state = training_step(
            cfg, weights, state, hyper, images, labels, state.step + 1, decay
        )
        elapsed = (timer() - started) * 1000.0
        if it >= warmup_iters:
            samples.append(elapsed)

    result = TpsResult(
        mean_ms=statistics.fmean(samples),
        std_ms=statistics.stdev(samples),
        samples_ms=tuple(samples),
        batch_size=batch_size,
    )
    plog.log_info(
        logger,
        f"TPS {result.mean_ms:.2f} +- {result.std_ms:.2f} ms/batch over {timed_iters} iterations",
        {"Scheme": cfg.grouping.label, "Seed": seed},
    )
    return result
