"""Checkpoint files: a JSON header followed by raw little-endian f32 buffers.

Layout::

    b"GQKVCKPT"                      8-byte magic
    uint32 little-endian             header length in bytes
    header                           UTF-8 JSON, keys sorted
    weights                          f32 LE, row-major, in ``weight_layout`` order

The header holds ``format_version``, the ``ViTConfig`` (scheme as its
canonical string) and ``param_count``. Loading rejects files whose payload
length differs from ``param_count(config) * 4``.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from ...modules.logging import python_logging_framework as plog
from ...modules.utils.file_operations import atomic_write_bytes
from ..constants import BYTES_PER_PARAM, CHECKPOINT_FORMAT_VERSION, CHECKPOINT_MAGIC
from ..core.tensor import DType
from ..errors import CheckpointError, ConfigurationError
from .config import ViTConfig
from .vit import ViTWeights, count_params, weight_layout, weights_from_arrays

logger = plog.get_logger(__name__)

_LE_F32 = np.dtype("<f4")
_HEADER_LEN = struct.Struct("<I")


def encode_checkpoint(
    cfg: ViTConfig, weights: ViTWeights, extra: Optional[dict[str, Any]] = None
) -> bytes:
    """Serialise ``weights`` (cast to f32) with a header describing ``cfg``."""
    weights.check(cfg)
    header = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "config": cfg.to_dict(),
        "param_count": count_params(cfg).total,
    }
    if extra:
        header["extra"] = extra
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    parts = [CHECKPOINT_MAGIC, _HEADER_LEN.pack(len(header_bytes)), header_bytes]
    parts += [weights[spec.name].numpy().astype(_LE_F32).tobytes() for spec in weight_layout(cfg)]
    return b"".join(parts)


def decode_checkpoint(
    blob: bytes, dtype: DType | str = DType.F32
) -> tuple[ViTConfig, ViTWeights, dict[str, Any]]:
    """Parse checkpoint bytes into ``(config, weights, header)``.

    Raises:
        CheckpointError: bad magic, unsupported version, malformed header or a
            payload whose length disagrees with the configured parameter count.
    """
    magic_len = len(CHECKPOINT_MAGIC)
    if blob[:magic_len] != CHECKPOINT_MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    try:
        (header_len,) = _HEADER_LEN.unpack_from(blob, magic_len)
        start = magic_len + _HEADER_LEN.size
        header = json.loads(blob[start : start + header_len].decode("utf-8"))
    except (struct.error, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"malformed checkpoint header: {e}") from e
    if not isinstance(header, dict):
        raise CheckpointError(
            f"malformed checkpoint header: expected a JSON object, got {type(header).__name__}"
        )

    version = header.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint format_version {version!r}")
    try:
        cfg = ViTConfig.from_dict(header["config"])
    except (KeyError, TypeError, ValueError, ConfigurationError) as e:
        raise CheckpointError(f"invalid config in checkpoint header: {e}") from e

    expected = count_params(cfg).total
    payload = blob[start + header_len :]
    if len(payload) != expected * BYTES_PER_PARAM:
        raise CheckpointError(
            f"checkpoint payload is {len(payload)} bytes, "
            f"expected {expected * BYTES_PER_PARAM} for {expected} parameters"
        )

    flat = np.frombuffer(payload, dtype=_LE_F32)
    arrays = []
    offset = 0
    for spec in weight_layout(cfg):
        size = int(np.prod(spec.shape))
        arrays.append(flat[offset : offset + size].astype(DType.parse(dtype).numpy))
        offset += size
    return cfg, weights_from_arrays(cfg, arrays, dtype), header


def save_checkpoint(
    path: Union[str, Path],
    cfg: ViTConfig,
    weights: ViTWeights,
    extra: Optional[dict[str, Any]] = None,
) -> Path:
    """Write a checkpoint atomically to ``path``."""
    out = atomic_write_bytes(path, encode_checkpoint(cfg, weights, extra))
    plog.log_debug(logger, "Checkpoint written", {"Path": str(out), "Scheme": cfg.grouping.label})
    return out


def load_checkpoint(
    path: Union[str, Path], dtype: DType | str = DType.F32
) -> tuple[ViTConfig, ViTWeights]:
    """Read a checkpoint written by ``save_checkpoint``."""
    try:
        blob = Path(path).read_bytes()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint '{path}': {e}") from e
    cfg, weights, _ = decode_checkpoint(blob, dtype)
    plog.log_debug(logger, "Checkpoint loaded", {"Path": str(path), "Scheme": cfg.grouping.label})
    return cfg, weights
