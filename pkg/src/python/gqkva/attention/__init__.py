"""Grouped attention: schemes, the attention layer and its cost accounting."""

from .accounting import FlopReport, attention_flops, attention_param_count, qkv_param_count
from .layer import (
    AttentionWeights,
    ScaleMode,
    attention_weight_shapes,
    grouped_attention_forward,
    init_attention_weights,
)
from .scheme import (
    SCHEME_GRAMMAR,
    TABLE1_SCHEMES,
    GroupingScheme,
    SchemeKind,
    all_schemes_for,
    effective_heads,
    expand_schemes,
    make_scheme,
    parse_scheme,
    permute_pairing,
    validate_scheme,
)

__all__ = [
    "AttentionWeights",
    "FlopReport",
    "GroupingScheme",
    "SCHEME_GRAMMAR",
    "ScaleMode",
    "SchemeKind",
    "TABLE1_SCHEMES",
    "all_schemes_for",
    "attention_flops",
    "attention_param_count",
    "attention_weight_shapes",
    "effective_heads",
    "expand_schemes",
    "grouped_attention_forward",
    "init_attention_weights",
    "make_scheme",
    "parse_scheme",
    "permute_pairing",
    "qkv_param_count",
    "validate_scheme",
]
