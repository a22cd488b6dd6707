"""Deterministic training loop for the micro-ViT.

A run is fully determined by the config, the hyperparameters (including the
seed) and the dataset: the seed fixes weight initialisation, the per-epoch
shuffle order and the monitor batch. The logged per-step ``loss`` is measured
on that fixed monitor batch with the weights the step starts from, so it only
moves when the weights do. Wall-clock timings are recorded but excluded from
``TrainLog`` equality.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
from tqdm import tqdm

from ...modules.logging import python_logging_framework as plog
from ...modules.utils.file_operations import atomic_write_text, ensure_directory
from ..constants import CHECKPOINT_FILE, TRAIN_LOG_FILE
from ..core.tape import Tape, no_tape
from ..core.tensor import DType, Tensor
from ..errors import DimensionError, DivergedTrainingError, NonFiniteError
from ..model.checkpoint import save_checkpoint
from ..model.config import ViTConfig
from ..model.vit import ViTWeights, init_weights, vit_forward, weight_layout
from .data import Dataset
from .loss import accuracy, cross_entropy
from .optimizer import AdamState, TrainHyper, adamw_step

logger = plog.get_logger(__name__)

Timer = Callable[[], float]


@dataclass(frozen=True)
class StepRecord:
    step: int
    loss: float
    minibatch_loss: float
    lr: float
    ms_per_batch: float = field(compare=False)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    step: int
    train_loss: float
    val_accuracy: float


@dataclass
class TrainLog:
    """Per-step losses and per-epoch validation accuracy of one run."""

    steps: list[StepRecord] = field(default_factory=list)
    epochs: list[EpochRecord] = field(default_factory=list)

    @property
    def initial_loss(self) -> float:
        return self.steps[0].loss

    @property
    def final_loss(self) -> float:
        return self.steps[-1].loss

    @property
    def final_accuracy(self) -> Optional[float]:
        return self.epochs[-1].val_accuracy if self.epochs else None

    def to_jsonl(self) -> str:
        """One JSON object per step record, then one per epoch record."""
        lines = [json.dumps({"type": "step", **asdict(r)}, sort_keys=True) for r in self.steps]
        lines += [json.dumps({"type": "epoch", **asdict(r)}, sort_keys=True) for r in self.epochs]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "TrainLog":
        log = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            kind = record.pop("type")
            if kind == "step":
                log.steps.append(StepRecord(**record))
            else:
                log.epochs.append(EpochRecord(**record))
        return log


@dataclass
class TrainResult:
    config: ViTConfig
    weights: ViTWeights
    log: TrainLog
    checkpoint_path: Optional[Path] = None
    log_path: Optional[Path] = None


def loss_and_grads(
    cfg: ViTConfig, weights: ViTWeights, images: Tensor, labels: np.ndarray
) -> tuple[float, dict[str, Tensor]]:
    """Mean cross-entropy on one batch and its gradient for every parameter."""
    with Tape() as tape:
        logits = vit_forward(cfg, weights, images)
    loss, dlogits = cross_entropy(logits, labels)
    names = list(weights)
    pairs = tape.gradients(logits, [weights[n] for n in names], upstream=dlogits)
    return loss, {n: p.grad for n, p in zip(names, pairs)}


def training_step(
    cfg: ViTConfig,
    weights: ViTWeights,
    state: AdamState,
    hyper: TrainHyper,
    images: Tensor,
    labels: np.ndarray,
    step: int,
    decay: Optional[set[str]] = None,
) -> tuple[float, ViTWeights, AdamState]:
    """Forward, backward and one AdamW update. Returns ``(loss, weights, state)``."""
    loss, grads = loss_and_grads(cfg, weights, images, labels)
    if not math.isfinite(loss):
        raise DivergedTrainingError(step, f"loss is {loss}")
    if decay is None:
        decay = {spec.name for spec in weight_layout(cfg) if spec.decay}
    updated, state = adamw_step(weights, grads, state, hyper, step, decay=decay)
    return loss, weights.updated(updated), state


def evaluate(cfg: ViTConfig, weights: ViTWeights, dataset: Dataset, batch_size: int) -> float:
    """Top-1 accuracy over ``dataset`` without recording gradients."""
    if len(dataset) == 0:
        return 0.0
    correct = 0.0
    with no_tape():
        for start in range(0, len(dataset), batch_size):
            sl = slice(start, start + batch_size)
            logits = vit_forward(cfg, weights, Tensor(dataset.images[sl], dtype=weights.dtype))
            correct += accuracy(logits, dataset.labels[sl]) * logits.shape[0]
    return correct / len(dataset)


def monitor_batch(train: Dataset, batch_size: int, seed: int) -> np.ndarray:
    """Indices of the fixed batch every step's loss is measured on, drawn once from ``seed``."""
    rng = np.random.default_rng([seed, 2])
    return np.sort(rng.permutation(len(train))[: min(batch_size, len(train))])


def monitor_loss(cfg: ViTConfig, weights: ViTWeights, images: Tensor, labels: np.ndarray) -> float:
    """Mean cross-entropy of ``weights`` on a batch, without recording gradients."""
    with no_tape():
        logits = vit_forward(cfg, weights, images)
    loss, _ = cross_entropy(logits, labels)
    return loss


def _check_dataset(cfg: ViTConfig, dataset: Dataset) -> None:
    expected = (cfg.in_channels, cfg.image_size, cfg.image_size)
    if dataset.image_shape != expected:
        raise DimensionError(f"dataset images are {dataset.image_shape}, model expects {expected}")
    if dataset.classes > cfg.num_classes:
        raise DimensionError(
            f"dataset has {dataset.classes} classes, model head has {cfg.num_classes}"
        )


def train_loop(
    cfg: ViTConfig,
    hyper: TrainHyper,
    dataset: Dataset,
    out_dir: Optional[Union[str, Path]] = None,
    progress: bool = False,
    timer: Timer = time.perf_counter,
    dtype: DType | str = DType.F32,
) -> TrainResult:
    """Train from a seeded initialisation for ``hyper.steps`` AdamW steps.

    The monitor-batch loss (plus the minibatch loss the update used) is logged
    every step and validation accuracy at the end of every epoch
    (and after the final step). With ``out_dir`` the line-delimited log and the
    final checkpoint are written there.

    Raises:
        DivergedTrainingError: the loss or any intermediate value became non-finite.
    """
    _check_dataset(cfg, dataset)
    train, validation = dataset.split()
    if len(train) == 0:
        raise DimensionError("training split is empty")
    weights = init_weights(cfg, hyper.seed, dtype)
    state = AdamState()
    order_rng = np.random.default_rng([hyper.seed, 1])
    decay = {spec.name for spec in weight_layout(cfg) if spec.decay}
    watch = monitor_batch(train, hyper.batch_size, hyper.seed)
    watch_images = Tensor(train.images[watch], dtype=weights.dtype)
    watch_labels = train.labels[watch]
    log = TrainLog()
    meta = {"Scheme": cfg.grouping.label, "Seed": hyper.seed}
    plog.log_info(
        logger,
        f"Training {hyper.steps} steps, batch {hyper.batch_size}, lr {hyper.lr:g} "
        f"({hyper.schedule.value}), {len(train)} train / {len(validation)} validation samples",
        meta,
    )

    step = 0
    epoch = 0
    epoch_losses: list[float] = []
    bar = tqdm(total=hyper.steps, desc=cfg.grouping.label, unit="step", disable=not progress)
    try:
        while step < hyper.steps:
            epoch += 1
            for idx in train.batches(hyper.batch_size, order_rng):
                step += 1
                images = Tensor(train.images[idx], dtype=weights.dtype)
                lr = hyper.lr_at(step)
                try:
                    loss = monitor_loss(cfg, weights, watch_images, watch_labels)
                    if not math.isfinite(loss):
                        raise DivergedTrainingError(step, f"monitor loss is {loss}")
                    started = timer()
                    batch_loss, weights, state = training_step(
                        cfg, weights, state, hyper, images, train.labels[idx], step, decay
                    )
                    elapsed_ms = (timer() - started) * 1000.0
                except NonFiniteError as e:
                    raise DivergedTrainingError(step, str(e)) from e
                log.steps.append(StepRecord(step, loss, batch_loss, lr, elapsed_ms))
                epoch_losses.append(batch_loss)
                plog.log_debug(
                    logger,
                    f"loss={loss:.6f} batch={batch_loss:.6f} lr={lr:.3e} ms={elapsed_ms:.1f}",
                    {**meta, "Step": step},
                )
                bar.update(1)
                bar.set_postfix(loss=f"{loss:.4f}")
                if step >= hyper.steps:
                    break
            val_acc = evaluate(cfg, weights, validation, hyper.batch_size)
            log.epochs.append(EpochRecord(epoch, step, float(np.mean(epoch_losses)), val_acc))
            plog.log_info(
                logger,
                f"epoch {epoch}: mean loss {np.mean(epoch_losses):.4f}, val acc {val_acc:.3f}",
                {**meta, "Epoch": epoch, "Step": step},
            )
            epoch_losses = []
    finally:
        bar.close()

    result = TrainResult(cfg, weights, log)
    if out_dir is not None:
        root = ensure_directory(out_dir)
        result.log_path = atomic_write_text(root / TRAIN_LOG_FILE, log.to_jsonl())
        result.checkpoint_path = save_checkpoint(
            root / CHECKPOINT_FILE, cfg, weights, extra={"steps": step, "seed": hyper.seed}
        )
        plog.log_info(logger, "Run artifacts written", {**meta, "Path": str(root)})
    return result
