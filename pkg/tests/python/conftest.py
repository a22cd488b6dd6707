"""
Pytest configuration and shared fixtures for the gqkva tests.

Fixtures build small, seeded objects so tests stay fast and deterministic.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Repository root on the path so tests import ``src.python.gqkva``
repo_root = Path(__file__).resolve().parents[2]
if str(repo_root) not in sys.path:
    sys.path.insert(0, str(repo_root))

from src.python.gqkva.model.config import ViTConfig, preset_config  # noqa: E402
from src.python.gqkva.training.data import synth_dataset  # noqa: E402


@pytest.fixture
def rng():
    """Seeded generator for test inputs."""
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_cfg():
    """The ``tiny`` preset with MHA: 16x16x3 images, d=48, 2 blocks, 6 heads."""
    return preset_config("tiny")


@pytest.fixture
def micro_cfg():
    """Smallest useful ViT: 4x4x1 images, 2x2 patches, d=12, one block, 6 heads."""
    return ViTConfig(
        image_size=4,
        patch_size=2,
        in_channels=1,
        d=12,
        depth=1,
        h=6,
        mlp_ratio=1,
        num_classes=3,
    )


@pytest.fixture
def small_dataset():
    """60 synthetic grating images matching the tiny preset."""
    return synth_dataset(0, n_samples=60, image_size=16, classes=6, channels=3)
