"""Grouped attention layer: weights, initialisation and forward pass."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from enum import Enum
from typing import Sequence

import numpy as np

from ..constants import INIT_STD, INIT_TRUNCATION
from ..core import ops
from ..core.tensor import DType, Tensor, trunc_normal, zeros
from ..errors import DimensionError
from .scheme import GroupingScheme


class ScaleMode(str, Enum):
    """Denominator of the attention scores: ``sqrt(head_dim)`` or ``sqrt(d)``."""

    HEAD_DIM = "head-dim"
    EMBED_DIM = "embed-dim"

    def factor(self, s: GroupingScheme) -> float:
        return 1.0 / math.sqrt(s.head_dim if self is ScaleMode.HEAD_DIM else s.d)


def attention_weight_shapes(s: GroupingScheme) -> dict[str, tuple[int, ...]]:
    q_width = s.g_q * s.head_dim
    kv_width = s.g_kv * s.head_dim
    return {
        "w_q": (s.d, q_width),
        "b_q": (q_width,),
        "w_k": (s.d, kv_width),
        "b_k": (kv_width,),
        "w_v": (s.d, kv_width),
        "b_v": (kv_width,),
        "w_o": (s.d, s.d),
        "b_o": (s.d,),
    }


@dataclass(frozen=True)
class AttentionWeights:
    """qkv and output projections of one attention layer.

    Row block ``t`` of ``w_o`` (``head_dim`` rows) multiplies head ``t`` in
    pairing order.
    """

    w_q: Tensor
    b_q: Tensor
    w_k: Tensor
    b_k: Tensor
    w_v: Tensor
    b_v: Tensor
    w_o: Tensor
    b_o: Tensor

    @classmethod
    def names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_tensors(cls, tensors: Sequence[Tensor]) -> "AttentionWeights":
        return cls(*tensors)

    def tensors(self) -> tuple[Tensor, ...]:
        return tuple(getattr(self, name) for name in self.names())

    @property
    def element_count(self) -> int:
        return sum(t.size for t in self.tensors())

    def check(self, s: GroupingScheme) -> None:
        """Raise ``DimensionError`` if any tensor's shape disagrees with ``s``."""
        for name, shape in attention_weight_shapes(s).items():
            actual = getattr(self, name).shape
            if actual != shape:
                raise DimensionError(f"{name} has shape {actual}, scheme {s.label} needs {shape}")


def init_attention_weights(
    s: GroupingScheme,
    rng: np.random.Generator,
    dtype: DType | str = DType.F32,
    std: float = INIT_STD,
) -> AttentionWeights:
    """Truncated-normal projections and zero biases, drawn in ``AttentionWeights.names()`` order."""
    shapes = attention_weight_shapes(s)
    tensors = []
    for name in AttentionWeights.names():
        if name.startswith("w_"):
            tensors.append(trunc_normal(rng, shapes[name], std, INIT_TRUNCATION, dtype))
        else:
            tensors.append(zeros(shapes[name], dtype))
    return AttentionWeights.from_tensors(tensors)


def _group_slices(t: Tensor, groups: int, width: int) -> list[Tensor]:
    if groups == 1:
        return [t]
    return [ops.slice_axis(t, -1, g * width, (g + 1) * width) for g in range(groups)]


def grouped_attention_forward(
    x: Tensor,
    w: AttentionWeights,
    s: GroupingScheme,
    scale_mode: ScaleMode = ScaleMode.HEAD_DIM,
) -> Tensor:
    """Grouped attention over ``x`` of shape ``[B, N, d]``.

    Head ``t`` with pairing ``(i, j)`` computes
    ``softmax(Q_i K_j^T * scale) V_j``; heads are concatenated in pairing order
    and passed through ``w_o``/``b_o``. Every step is recorded on the active tape.
    """
    if x.ndim != 3 or x.shape[-1] != s.d:
        raise DimensionError(f"attention input must be [B, N, {s.d}], got {x.shape}")
    w.check(s)

    hd = s.head_dim
    q_blocks = _group_slices(ops.add(ops.matmul(x, w.w_q), w.b_q), s.g_q, hd)
    k_blocks = _group_slices(ops.add(ops.matmul(x, w.w_k), w.b_k), s.g_kv, hd)
    v_blocks = _group_slices(ops.add(ops.matmul(x, w.w_v), w.b_v), s.g_kv, hd)
    k_t = [ops.transpose(k) for k in k_blocks]
    factor = scale_mode.factor(s)

    heads = []
    for i, j in s.pairing:
        scores = ops.scale(ops.matmul(q_blocks[i], k_t[j]), factor)
        heads.append(ops.matmul(ops.softmax_lastdim(scores), v_blocks[j]))
    merged = heads[0] if len(heads) == 1 else ops.concat(heads, axis=-1)
    return ops.add(ops.matmul(merged, w.w_o), w.b_o)
