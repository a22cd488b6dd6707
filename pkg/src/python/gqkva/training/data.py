"""Labelled image sets: the synthetic grating dataset and the on-disk directory format.

Dataset directory layout::

    dataset.json   {"format_version", "n", "channels", "height", "width", "classes"}
    images.bin     float32 little-endian, [n, channels, height, width], row-major
    labels.bin     int32 little-endian, [n]
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Union

import numpy as np

from ...modules.logging import python_logging_framework as plog
from ...modules.utils.file_operations import atomic_write_bytes, atomic_write_text
from ..constants import (
    DATASET_IMAGES_FILE,
    DATASET_LABELS_FILE,
    DATASET_META_FILE,
    SYNTH_CLASSES,
    SYNTH_SAMPLES,
    VALIDATION_EVERY,
)
from ..errors import CheckpointError, ConfigurationError, InputError

logger = plog.get_logger(__name__)

DATASET_FORMAT_VERSION = 1
_LE_F32 = np.dtype("<f4")
_LE_I32 = np.dtype("<i4")


@dataclass(frozen=True)
class Dataset:
    """Images ``[n, C, H, W]`` (float32) with integer labels in ``[0, classes)``."""

    images: np.ndarray
    labels: np.ndarray
    classes: int

    def __post_init__(self) -> None:
        images = np.array(self.images, dtype=np.float32, copy=True, order="C")
        labels = np.array(self.labels, dtype=np.int64, copy=True).reshape(-1)
        if images.ndim != 4:
            raise InputError(f"images must be [n, C, H, W], got {images.shape}")
        if images.shape[0] != labels.shape[0]:
            raise InputError(f"{images.shape[0]} images but {labels.shape[0]} labels")
        if self.classes < 2:
            raise ConfigurationError(f"classes must be >= 2, got {self.classes}")
        if labels.size and (labels.min() < 0 or labels.max() >= self.classes):
            raise InputError(f"labels outside [0, {self.classes})")
        if not np.all(np.isfinite(images)):
            raise InputError("images contain non-finite values")
        images.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def image_shape(self) -> tuple[int, int, int]:
        _, c, h, w = self.images.shape
        return c, h, w

    def subset(self, index: np.ndarray) -> "Dataset":
        return Dataset(self.images[index], self.labels[index], self.classes)

    def split(self) -> tuple["Dataset", "Dataset"]:
        """``(train, validation)``: every tenth sample (index 9, 19, ...) is validation."""
        idx = np.arange(len(self))
        is_val = idx % VALIDATION_EVERY == VALIDATION_EVERY - 1
        return self.subset(idx[~is_val]), self.subset(idx[is_val])

    def batches(self, batch_size: int, rng: np.random.Generator) -> Iterator[np.ndarray]:
        """Index batches over one shuffled pass; the last batch may be short."""
        order = rng.permutation(len(self))
        for start in range(0, len(order), batch_size):
            yield order[start : start + batch_size]

    def to_bytes(self) -> tuple[bytes, bytes]:
        return self.images.astype(_LE_F32).tobytes(), self.labels.astype(_LE_I32).tobytes()


def synth_dataset(
    seed: int,
    n_samples: int = SYNTH_SAMPLES,
    image_size: int = 16,
    classes: int = SYNTH_CLASSES,
    channels: int = 3,
    noise: float = 0.5,
) -> Dataset:
    """Class-conditional sinusoidal gratings plus Gaussian noise.

    Class ``k`` has orientation ``pi * k / classes`` and a spatial frequency of
    2 or 3 cycles per image (alternating with ``k``). Labels are assigned
    round-robin, so class counts differ by at most one, and the sample order is
    then shuffled. Each channel carries the grating with a fixed phase offset;
    per-sample phase jitter is small so class means stay distinct.
    """
    if classes < 2:
        raise ConfigurationError(f"classes must be >= 2, got {classes}")
    if n_samples < 1 or image_size < 1 or channels < 1:
        raise ConfigurationError("n_samples, image_size and channels must be positive")
    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.arange(n_samples) % classes)

    coords = (np.arange(image_size) + 0.5) / image_size
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    theta = math.pi * np.arange(classes) / classes
    freq = 2.0 + (np.arange(classes) % 2)
    channel_phase = np.arange(channels) * (math.pi / 4)

    jitter = rng.uniform(-0.3, 0.3, size=n_samples)
    images = np.empty((n_samples, channels, image_size, image_size), dtype=np.float64)
    for i, k in enumerate(labels):
        proj = xx * math.cos(theta[k]) + yy * math.sin(theta[k])
        base = 2.0 * math.pi * freq[k] * proj + jitter[i]
        images[i] = np.cos(base[None, :, :] + channel_phase[:, None, None])
    images += rng.normal(0.0, noise, size=images.shape)
    return Dataset(images.astype(np.float32), labels, classes)


def save_dataset_dir(path: Union[str, Path], dataset: Dataset) -> Path:
    """Write ``dataset`` in the directory format described above."""
    out = Path(path)
    c, h, w = dataset.image_shape
    meta = {
        "format_version": DATASET_FORMAT_VERSION,
        "n": len(dataset),
        "channels": c,
        "height": h,
        "width": w,
        "classes": dataset.classes,
    }
    images, labels = dataset.to_bytes()
    atomic_write_bytes(out / DATASET_IMAGES_FILE, images)
    atomic_write_bytes(out / DATASET_LABELS_FILE, labels)
    atomic_write_text(out / DATASET_META_FILE, json.dumps(meta, sort_keys=True, indent=2) + "\n")
    plog.log_info(logger, f"Dataset of {len(dataset)} samples written", {"Path": str(out)})
    return out


def load_dataset_dir(path: Union[str, Path]) -> Dataset:
    """Read a dataset directory.

    Raises:
        CheckpointError: missing files, malformed metadata or buffer sizes that
            disagree with the metadata.
        InputError: labels outside ``[0, classes)``.
    """
    root = Path(path)
    try:
        meta = json.loads((root / DATASET_META_FILE).read_text(encoding="utf-8"))
        image_bytes = (root / DATASET_IMAGES_FILE).read_bytes()
        label_bytes = (root / DATASET_LABELS_FILE).read_bytes()
    except (OSError, json.JSONDecodeError) as e:
        raise CheckpointError(f"cannot read dataset directory '{root}': {e}") from e

    try:
        n, c, h, w = (int(meta[k]) for k in ("n", "channels", "height", "width"))
        classes = int(meta["classes"])
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"malformed {DATASET_META_FILE}: {e}") from e
    if meta.get("format_version") != DATASET_FORMAT_VERSION:
        raise CheckpointError(f"unsupported dataset format_version {meta.get('format_version')!r}")
    if len(image_bytes) != n * c * h * w * _LE_F32.itemsize:
        raise CheckpointError(
            f"{DATASET_IMAGES_FILE} is {len(image_bytes)} bytes, expected {n * c * h * w * 4}"
        )
    if len(label_bytes) != n * _LE_I32.itemsize:
        raise CheckpointError(
            f"{DATASET_LABELS_FILE} is {len(label_bytes)} bytes, expected {n * 4}"
        )

    images = np.frombuffer(image_bytes, dtype=_LE_F32).reshape(n, c, h, w)
    labels = np.frombuffer(label_bytes, dtype=_LE_I32)
    dataset = Dataset(images, labels, classes)
    plog.log_debug(logger, f"Dataset of {n} samples loaded", {"Path": str(root)})
    return dataset
