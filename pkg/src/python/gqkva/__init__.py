"""Grouped Q/K/V attention toolkit.

One attention layer parameterised by a grouping scheme covers MHA, MQA, GQA,
MKVA, GKVA and GQKVA. Around it sit a small numpy autodiff core, a micro-ViT,
AdamW training on synthetic data, parameter/FLOP accounting and a benchmark
report writer.
"""

from .attention import GroupingScheme, make_scheme, parse_scheme, validate_scheme
from .constants import VERSION
from .errors import GqkvaError
from .model import ViTConfig, count_params, preset_config

__version__ = VERSION

__all__ = [
    "GqkvaError",
    "GroupingScheme",
    "ViTConfig",
    "__version__",
    "count_params",
    "make_scheme",
    "parse_scheme",
    "preset_config",
    "validate_scheme",
]
