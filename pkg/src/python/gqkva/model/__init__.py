"""Micro-ViT: configuration presets, weights, forward pass and checkpoints."""

from .checkpoint import load_checkpoint, save_checkpoint
from .config import PRESET_NAMES, ViTConfig, preset_config
from .vit import (
    ParamReport,
    ParamSpec,
    ViTWeights,
    count_params,
    init_weights,
    model_flops,
    patchify,
    unpatchify,
    vit_forward,
    weight_layout,
)

__all__ = [
    "PRESET_NAMES",
    "ParamReport",
    "ParamSpec",
    "ViTConfig",
    "ViTWeights",
    "count_params",
    "init_weights",
    "load_checkpoint",
    "model_flops",
    "patchify",
    "preset_config",
    "save_checkpoint",
    "unpatchify",
    "vit_forward",
    "weight_layout",
]
