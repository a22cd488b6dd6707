"""Toy-scale training: loss, AdamW, synthetic data and the training loop."""

from .data import Dataset, load_dataset_dir, save_dataset_dir, synth_dataset
from .loss import accuracy, cross_entropy
from .optimizer import AdamState, Schedule, TrainHyper, adamw_step
from .trainer import (
    EpochRecord,
    StepRecord,
    TrainLog,
    TrainResult,
    evaluate,
    loss_and_grads,
    train_loop,
    training_step,
)

__all__ = [
    "AdamState",
    "Dataset",
    "EpochRecord",
    "Schedule",
    "StepRecord",
    "TrainHyper",
    "TrainLog",
    "TrainResult",
    "accuracy",
    "adamw_step",
    "cross_entropy",
    "evaluate",
    "load_dataset_dir",
    "loss_and_grads",
    "save_dataset_dir",
    "synth_dataset",
    "train_loop",
    "training_step",
]
