"""ViT hyperparameters and named presets."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Any, Mapping, Optional, Union

from ..attention.layer import ScaleMode
from ..attention.scheme import GroupingScheme, make_scheme, parse_scheme, validate_scheme
from ..errors import ConfigurationError

PRESET_NAMES = ("vit-small", "tiny", "custom")


@dataclass(frozen=True)
class ViTConfig:
    """Model hyperparameters plus the grouping scheme of every attention layer.

    ``scheme`` defaults to MHA for the configured ``d`` and ``h``.
    """

    image_size: int = 224
    patch_size: int = 16
    in_channels: int = 3
    d: int = 384
    depth: int = 12
    h: int = 6
    mlp_ratio: int = 4
    num_classes: int = 1000
    scheme: Optional[GroupingScheme] = field(default=None)
    drop_rate: float = 0.0
    scale_mode: ScaleMode = ScaleMode.HEAD_DIM

    def __post_init__(self) -> None:
        for name in ("image_size", "patch_size", "in_channels", "d", "depth", "h", "mlp_ratio"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.num_classes < 2:
            raise ConfigurationError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.image_size % self.patch_size:
            raise ConfigurationError(
                f"image_size mod patch_size must be 0, got {self.image_size} mod {self.patch_size}"
            )
        if self.d % self.h:
            raise ConfigurationError(f"d mod h must be 0, got d={self.d}, h={self.h}")
        object.__setattr__(self, "scale_mode", ScaleMode(self.scale_mode))
        if self.drop_rate != 0.0:
            raise ConfigurationError(f"drop_rate must be 0, got {self.drop_rate}")
        if self.scheme is None:
            object.__setattr__(self, "scheme", make_scheme("mha", self.d, self.h))
        s = self.grouping
        if s.d != self.d or s.h != self.h:
            raise ConfigurationError(
                f"scheme {s.label} is for d={s.d}, h={s.h}; config has d={self.d}, h={self.h}"
            )
        problems = validate_scheme(s)
        if problems:
            raise ConfigurationError(f"invalid scheme {s.label}: {'; '.join(problems)}")

    @property
    def grouping(self) -> GroupingScheme:
        assert self.scheme is not None
        return self.scheme

    @property
    def num_patches(self) -> int:
        return (self.image_size // self.patch_size) ** 2

    @property
    def seq_len(self) -> int:
        """Tokens per image including the class token."""
        return self.num_patches + 1

    @property
    def patch_dim(self) -> int:
        return self.patch_size * self.patch_size * self.in_channels

    @property
    def mlp_hidden(self) -> int:
        return self.mlp_ratio * self.d

    def with_scheme(self, scheme: Union[str, GroupingScheme]) -> "ViTConfig":
        if isinstance(scheme, str):
            scheme = parse_scheme(scheme, self.d, self.h)
        return replace(self, scheme=scheme)

    def to_dict(self) -> dict[str, Any]:
        """Plain-value form with the scheme as its canonical string."""
        data = asdict(self)
        data["scheme"] = self.grouping.canonical
        data["scale_mode"] = self.scale_mode.value
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ViTConfig":
        values = dict(data)
        scheme_text = values.pop("scheme", "mha")
        values["scale_mode"] = ScaleMode(values.get("scale_mode", ScaleMode.HEAD_DIM.value))
        known = {f for f in cls.__dataclass_fields__ if f != "scheme"}
        unknown = set(values) - known
        if unknown:
            raise ConfigurationError(f"unknown config fields: {sorted(unknown)}")
        base = cls(**values)
        return base.with_scheme(scheme_text)


_PRESETS: dict[str, dict[str, Any]] = {
    # 224 / 16 -> 196 patches + class token, 1000-way head.
    "vit-small": {
        "image_size": 224,
        "patch_size": 16,
        "in_channels": 3,
        "d": 384,
        "depth": 12,
        "h": 6,
        "mlp_ratio": 4,
        "num_classes": 1000,
    },
    "tiny": {
        "image_size": 16,
        "patch_size": 4,
        "in_channels": 3,
        "d": 48,
        "depth": 2,
        "h": 6,
        "mlp_ratio": 2,
        "num_classes": 6,
    },
}
_PRESETS["custom"] = dict(_PRESETS["tiny"])


def preset_config(
    name: str, scheme: Union[str, GroupingScheme] = "mha", **overrides: Any
) -> ViTConfig:
    """A named preset with field overrides (``None`` values are ignored).

    Raises:
        ConfigurationError: unknown preset name or an invalid resulting config.
    """
    try:
        values = dict(_PRESETS[name])
    except KeyError:
        raise ConfigurationError(
            f"unknown preset {name!r}; expected one of {', '.join(PRESET_NAMES)}"
        ) from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ViTConfig(**values).with_scheme(scheme)
