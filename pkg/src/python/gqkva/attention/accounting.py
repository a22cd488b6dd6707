"""Closed-form parameter and FLOP counts for a grouped attention layer.

FLOPs are counted as 2 x multiply-accumulates for one sequence of ``N`` tokens.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigurationError
from .scheme import GroupingScheme


def qkv_param_count(s: GroupingScheme, include_bias: bool = True) -> int:
    """Parameters of the qkv layer alone: ``d * (g_q + 2*g_kv) * head_dim`` (+ biases)."""
    width = s.qkv_width
    return s.d * width + (width if include_bias else 0)


def attention_param_count(s: GroupingScheme, include_bias: bool = True) -> int:
    """qkv layer plus the ``d x d`` output projection (+ biases)."""
    return qkv_param_count(s, include_bias) + s.d * s.d + (s.d if include_bias else 0)


@dataclass(frozen=True)
class FlopReport:
    projection_flops: int
    score_flops: int
    weighted_sum_flops: int
    output_proj_flops: int

    def __post_init__(self) -> None:
        for name in ("projection_flops", "score_flops", "weighted_sum_flops", "output_proj_flops"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0, got {getattr(self, name)}")

    @property
    def total(self) -> int:
        return (
            self.projection_flops
            + self.score_flops
            + self.weighted_sum_flops
            + self.output_proj_flops
        )

    def times(self, n: int) -> "FlopReport":
        """The same counts for ``n`` independent sequences or stacked layers."""
        return FlopReport(
            self.projection_flops * n,
            self.score_flops * n,
            self.weighted_sum_flops * n,
            self.output_proj_flops * n,
        )


def attention_flops(n_tokens: int, s: GroupingScheme) -> FlopReport:
    """Forward FLOPs of one attention layer over ``n_tokens`` tokens."""
    if n_tokens < 1:
        raise ConfigurationError(f"sequence length must be >= 1, got {n_tokens}")
    n = n_tokens
    return FlopReport(
        projection_flops=2 * n * s.d * s.qkv_width,
        score_flops=2 * s.h * n * n * s.head_dim,
        weighted_sum_flops=2 * s.h * n * n * s.head_dim,
        output_proj_flops=2 * n * s.d * s.d,
    )
