"""Micro vision transformer built from grouped-attention blocks.

Weights live in a flat, ordered name -> tensor mapping whose order is given by
``weight_layout``; that order is also the checkpoint buffer order::

    patch_embed.w  [patch_dim, d]      patch_embed.b  [d]
    cls_token      [1, d]              pos_embed      [num_patches + 1, d]
    blocks.{i}.norm1.gamma/beta        [d]
    blocks.{i}.attn.w_q/b_q/w_k/b_k/w_v/b_v/w_o/b_o
    blocks.{i}.norm2.gamma/beta        [d]
    blocks.{i}.mlp.w1 [d, hidden]  b1 [hidden]  w2 [hidden, d]  b2 [d]
    norm.gamma/beta                    [d]
    head.w         [d, num_classes]    head.b         [num_classes]
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np

from ..attention.accounting import attention_flops, attention_param_count
from ..attention.layer import AttentionWeights, attention_weight_shapes, grouped_attention_forward
from ..constants import BYTES_PER_PARAM, INIT_STD, INIT_TRUNCATION, LAYERNORM_EPS, MIB
from ..core import ops
from ..core.tensor import DType, Tensor, ones, trunc_normal, zeros
from ..errors import ConfigurationError, DimensionError
from .config import ViTConfig


@dataclass(frozen=True)
class ParamSpec:
    name: str
    shape: tuple[int, ...]
    init: str  # "normal" | "zeros" | "ones"
    decay: bool


def weight_layout(cfg: ViTConfig) -> list[ParamSpec]:
    """Every parameter of the model in canonical order.

    Biases, norm affine parameters, the class token and position embeddings are
    excluded from weight decay.
    """
    d = cfg.d
    layout = [
        ParamSpec("patch_embed.w", (cfg.patch_dim, d), "normal", True),
        ParamSpec("patch_embed.b", (d,), "zeros", False),
        ParamSpec("cls_token", (1, d), "normal", False),
        ParamSpec("pos_embed", (cfg.seq_len, d), "normal", False),
    ]
    attn_shapes = attention_weight_shapes(cfg.grouping)
    for i in range(cfg.depth):
        p = f"blocks.{i}"
        layout += [
            ParamSpec(f"{p}.norm1.gamma", (d,), "ones", False),
            ParamSpec(f"{p}.norm1.beta", (d,), "zeros", False),
        ]
        for name, shape in attn_shapes.items():
            is_weight = name.startswith("w_")
            layout.append(
                ParamSpec(f"{p}.attn.{name}", shape, "normal" if is_weight else "zeros", is_weight)
            )
        layout += [
            ParamSpec(f"{p}.norm2.gamma", (d,), "ones", False),
            ParamSpec(f"{p}.norm2.beta", (d,), "zeros", False),
            ParamSpec(f"{p}.mlp.w1", (d, cfg.mlp_hidden), "normal", True),
            ParamSpec(f"{p}.mlp.b1", (cfg.mlp_hidden,), "zeros", False),
            ParamSpec(f"{p}.mlp.w2", (cfg.mlp_hidden, d), "normal", True),
            ParamSpec(f"{p}.mlp.b2", (d,), "zeros", False),
        ]
    layout += [
        ParamSpec("norm.gamma", (d,), "ones", False),
        ParamSpec("norm.beta", (d,), "zeros", False),
        ParamSpec("head.w", (d, cfg.num_classes), "normal", True),
        ParamSpec("head.b", (cfg.num_classes,), "zeros", False),
    ]
    return layout


class ViTWeights(Mapping[str, Tensor]):
    """Ordered, immutable mapping of parameter name to tensor."""

    def __init__(self, tensors: Mapping[str, Tensor]) -> None:
        self._tensors = dict(tensors)

    def __getitem__(self, name: str) -> Tensor:
        return self._tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    @property
    def element_count(self) -> int:
        return sum(t.size for t in self._tensors.values())

    @property
    def dtype(self) -> DType:
        return next(iter(self._tensors.values())).dtype

    def attention(self, block: int) -> AttentionWeights:
        prefix = f"blocks.{block}.attn."
        return AttentionWeights.from_tensors(
            [self._tensors[prefix + name] for name in AttentionWeights.names()]
        )

    def updated(self, changes: Mapping[str, Tensor]) -> "ViTWeights":
        """A copy with some tensors replaced (same names and shapes)."""
        merged = dict(self._tensors)
        for name, t in changes.items():
            if name not in merged:
                raise KeyError(name)
            if t.shape != merged[name].shape:
                raise DimensionError(f"{name}: shape {t.shape} != {merged[name].shape}")
            merged[name] = t
        return ViTWeights(merged)

    def astype(self, dtype: DType | str) -> "ViTWeights":
        return ViTWeights({k: v.astype(dtype) for k, v in self._tensors.items()})

    def check(self, cfg: ViTConfig) -> None:
        """Raise ``DimensionError`` unless names, order and shapes match ``weight_layout``."""
        layout = weight_layout(cfg)
        names = list(self._tensors)
        if names != [spec.name for spec in layout]:
            raise DimensionError("weight names do not match the model layout")
        for spec in layout:
            if self._tensors[spec.name].shape != spec.shape:
                raise DimensionError(
                    f"{spec.name}: shape {self._tensors[spec.name].shape} != {spec.shape}"
                )


def init_weights(cfg: ViTConfig, seed: int, dtype: DType | str = DType.F32) -> ViTWeights:
    """Seeded initialisation: truncated normal (std 0.02, +-2 std), zero biases, unit gammas.

    Tensors are drawn in layout order from one generator, so equal seeds give
    byte-identical weights.
    """
    rng = np.random.default_rng(seed)
    tensors: dict[str, Tensor] = {}
    for spec in weight_layout(cfg):
        if spec.init == "normal":
            tensors[spec.name] = trunc_normal(rng, spec.shape, INIT_STD, INIT_TRUNCATION, dtype)
        elif spec.init == "ones":
            tensors[spec.name] = ones(spec.shape, dtype)
        else:
            tensors[spec.name] = zeros(spec.shape, dtype)
    return ViTWeights(tensors)


# ---------------------------------------------------------------------------
# Patches
# ---------------------------------------------------------------------------


def patchify(images: Tensor, patch: int) -> Tensor:
    """``[B, C, H, W] -> [B, (H/p)*(W/p), p*p*C]``.

    Patches are taken in row-major order; each is flattened channel-major,
    then row-major within the channel.
    """
    if images.ndim != 4:
        raise DimensionError(f"images must be [B, C, H, W], got {images.shape}")
    b, c, height, width = images.shape
    if patch < 1 or height % patch or width % patch:
        raise DimensionError(
            f"image {height}x{width} is not divisible into {patch}x{patch} patches"
        )
    rows, cols = height // patch, width // patch
    x = ops.reshape(images, (b, c, rows, patch, cols, patch))
    x = ops.transpose(x, (0, 2, 4, 1, 3, 5))
    return ops.reshape(x, (b, rows * cols, c * patch * patch))


def unpatchify(patches: Tensor, patch: int, channels: int, height: int, width: int) -> Tensor:
    """Inverse of ``patchify``."""
    b = patches.shape[0]
    rows, cols = height // patch, width // patch
    if patches.shape != (b, rows * cols, channels * patch * patch):
        raise DimensionError(
            f"patches {patches.shape} do not tile a {channels}x{height}x{width} image"
        )
    x = ops.reshape(patches, (b, rows, cols, channels, patch, patch))
    x = ops.transpose(x, (0, 3, 1, 4, 2, 5))
    return ops.reshape(x, (b, channels, height, width))


# ---------------------------------------------------------------------------
# Forward
# ---------------------------------------------------------------------------


def _linear(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    return ops.add(ops.matmul(x, w), b)


def vit_forward(cfg: ViTConfig, w: ViTWeights, images: Tensor) -> Tensor:
    """Class logits ``[B, num_classes]`` for ``images`` of shape ``[B, C, H, W]``.

    Pre-norm blocks: ``x + attn(ln1(x))`` then ``x + mlp(ln2(x))``; the final
    norm and classifier read the class token.
    """
    expected = (cfg.in_channels, cfg.image_size, cfg.image_size)
    if images.ndim != 4 or images.shape[1:] != expected:
        raise DimensionError(f"images must be [B, C, H, W] = [B, {expected}], got {images.shape}")
    if images.dtype is not w.dtype:
        images = images.astype(w.dtype)
    batch, d = images.shape[0], cfg.d

    x = _linear(patchify(images, cfg.patch_size), w["patch_embed.w"], w["patch_embed.b"])
    cls = ops.broadcast_to(ops.reshape(w["cls_token"], (1, 1, d)), (batch, 1, d))
    x = ops.add(ops.concat([cls, x], axis=1), w["pos_embed"])

    for i in range(cfg.depth):
        p = f"blocks.{i}"
        y = ops.layernorm(x, w[f"{p}.norm1.gamma"], w[f"{p}.norm1.beta"], LAYERNORM_EPS)
        x = ops.add(x, grouped_attention_forward(y, w.attention(i), cfg.grouping, cfg.scale_mode))
        y = ops.layernorm(x, w[f"{p}.norm2.gamma"], w[f"{p}.norm2.beta"], LAYERNORM_EPS)
        hidden = ops.gelu(_linear(y, w[f"{p}.mlp.w1"], w[f"{p}.mlp.b1"]))
        x = ops.add(x, _linear(hidden, w[f"{p}.mlp.w2"], w[f"{p}.mlp.b2"]))

    # Normalisation is per token, so only the class token needs it.
    cls_out = ops.reshape(ops.slice_axis(x, 1, 0, 1), (batch, d))
    cls_out = ops.layernorm(cls_out, w["norm.gamma"], w["norm.beta"], LAYERNORM_EPS)
    return _linear(cls_out, w["head.w"], w["head.b"])


# ---------------------------------------------------------------------------
# Accounting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParamReport:
    patch_embed: int
    pos_embed: int
    cls_token: int
    attention: int
    mlp: int
    norms: int
    head: int

    @property
    def total(self) -> int:
        return sum(self.components().values())

    @property
    def total_size_mib(self) -> float:
        return self.total * BYTES_PER_PARAM / MIB

    @property
    def millions(self) -> float:
        return self.total / 1e6

    def components(self) -> dict[str, int]:
        return {
            "patch_embed": self.patch_embed,
            "pos_embed": self.pos_embed,
            "cls_token": self.cls_token,
            "attention": self.attention,
            "mlp": self.mlp,
            "norms": self.norms,
            "head": self.head,
        }


def count_params(cfg: ViTConfig) -> ParamReport:
    """Closed-form parameter count, biases included."""
    d, hidden = cfg.d, cfg.mlp_hidden
    return ParamReport(
        patch_embed=cfg.patch_dim * d + d,
        pos_embed=cfg.seq_len * d,
        cls_token=d,
        attention=cfg.depth * attention_param_count(cfg.grouping, include_bias=True),
        mlp=cfg.depth * (d * hidden + hidden + hidden * d + d),
        norms=(2 * cfg.depth + 1) * 2 * d,
        head=d * cfg.num_classes + cfg.num_classes,
    )


def model_flops(cfg: ViTConfig, batch: int = 1) -> int:
    """Forward FLOPs (2 x multiply-accumulates) of the matrix products for ``batch`` images."""
    if batch < 1:
        raise ConfigurationError(f"batch must be >= 1, got {batch}")
    n, d = cfg.seq_len, cfg.d
    per_image = (
        2 * cfg.num_patches * cfg.patch_dim * d
        + attention_flops(n, cfg.grouping).times(cfg.depth).total
        + cfg.depth * 2 * (2 * n * d * cfg.mlp_hidden)
        + 2 * d * cfg.num_classes
    )
    return batch * per_image


def weights_from_arrays(
    cfg: ViTConfig, arrays: Sequence[np.ndarray], dtype: DType | str = DType.F32
) -> ViTWeights:
    """Assemble weights from arrays given in layout order."""
    layout = weight_layout(cfg)
    if len(arrays) != len(layout):
        raise DimensionError(f"expected {len(layout)} arrays, got {len(arrays)}")
    return ViTWeights(
        {
            spec.name: Tensor(np.reshape(a, spec.shape), dtype=dtype)
            for spec, a in zip(layout, arrays)
        }
    )
