"""Immutable dense tensors.

``Tensor`` is the only numeric carrier in the toolkit: a row-major numpy buffer
with a shape of positive extents and an element type of ``f32`` or ``f64``.
Buffers are marked read-only and every construction checks that all elements
are finite, so a NaN or infinity surfaces as ``NonFiniteError`` at the
operation that produced it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Sequence

import numpy as np

from ..errors import DimensionError, DTypeError, NonFiniteError


class DType(str, Enum):
    """Element type of a tensor."""

    F32 = "f32"
    F64 = "f64"

    @property
    def numpy(self) -> np.dtype:
        return np.dtype(np.float32) if self is DType.F32 else np.dtype(np.float64)

    @property
    def itemsize(self) -> int:
        return self.numpy.itemsize

    @classmethod
    def parse(cls, value: Any) -> "DType":
        """Accept a ``DType``, ``"f32"``/``"f64"``, ``"float32"``/``"float64"`` or a numpy dtype."""
        if isinstance(value, DType):
            return value
        if isinstance(value, str) and value.lower() in ("f32", "f64"):
            return cls(value.lower())
        try:
            np_dtype = np.dtype(value)
        except TypeError as e:
            raise DTypeError(f"Unsupported dtype: {value!r}") from e
        if np_dtype == np.float32:
            return cls.F32
        if np_dtype == np.float64:
            return cls.F64
        raise DTypeError(f"Unsupported dtype: {value!r} (expected f32 or f64)")


class Tensor:
    """Dense n-dimensional array with shape and element type.

    Construct from anything ``numpy.asarray`` accepts. Float32 input stays
    ``f32``; everything else becomes ``f64`` unless ``dtype`` says otherwise.
    The input is copied, so later mutation of the source does not leak in.
    """

    __slots__ = ("_data",)

    def __init__(self, data: Any, dtype: DType | str | None = None) -> None:
        if isinstance(data, Tensor):
            data = data._data
        arr = np.asarray(data)
        if dtype is None:
            dtype = DType.F32 if arr.dtype == np.float32 else DType.F64
        arr = np.array(arr, dtype=DType.parse(dtype).numpy, copy=True)
        self._data = _seal(arr)

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "Tensor":
        """Adopt a freshly computed float32/float64 array without copying."""
        obj = cls.__new__(cls)
        obj._data = _seal(arr)
        return obj

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self._data.shape)

    @property
    def dtype(self) -> DType:
        return DType.parse(self._data.dtype)

    @property
    def ndim(self) -> int:
        return self._data.ndim

    @property
    def size(self) -> int:
        return int(self._data.size)

    def numpy(self) -> np.ndarray:
        """Read-only view of the underlying buffer."""
        return self._data

    def flat(self) -> np.ndarray:
        """Row-major flat view of the element buffer."""
        return self._data.reshape(-1)

    def item(self) -> float:
        if self.size != 1:
            raise DimensionError(f"item() needs a single element, got shape {self.shape}")
        return float(self._data.reshape(-1)[0])

    def astype(self, dtype: DType | str) -> "Tensor":
        target = DType.parse(dtype)
        if target is self.dtype:
            return self
        return Tensor._wrap(self._data.astype(target.numpy))

    def to_bytes(self) -> bytes:
        """Little-endian row-major bytes of the element buffer."""
        return self._data.astype(self._data.dtype.newbyteorder("<"), copy=False).tobytes()

    def tolist(self) -> Any:
        return self._data.tolist()

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, dtype={self.dtype.value})"

    def __add__(self, other: "Tensor") -> "Tensor":
        from . import ops

        return ops.add(self, other)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from . import ops

        return ops.matmul(self, other)

    def __mul__(self, factor: float) -> "Tensor":
        from . import ops

        return ops.scale(self, factor)

    __rmul__ = __mul__


def _seal(arr: np.ndarray) -> np.ndarray:
    if arr.dtype not in (np.float32, np.float64):
        raise DTypeError(f"Unsupported element type {arr.dtype} (expected f32 or f64)")
    if any(extent <= 0 for extent in arr.shape):
        raise DimensionError(f"All extents must be positive, got shape {tuple(arr.shape)}")
    if not np.all(np.isfinite(arr)):
        bad = int(np.count_nonzero(~np.isfinite(arr)))
        raise NonFiniteError(f"{bad} non-finite element(s) in tensor of shape {tuple(arr.shape)}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GradPair:
    """A value and its gradient; both tensors share one shape."""

    value: Tensor
    grad: Tensor

    def __post_init__(self) -> None:
        if self.value.shape != self.grad.shape:
            raise DimensionError(
                f"Gradient shape {self.grad.shape} does not match value shape {self.value.shape}"
            )


def zeros(shape: Sequence[int], dtype: DType | str = DType.F64) -> Tensor:
    return Tensor._wrap(np.zeros(tuple(shape), dtype=DType.parse(dtype).numpy))


def ones(shape: Sequence[int], dtype: DType | str = DType.F64) -> Tensor:
    return Tensor._wrap(np.ones(tuple(shape), dtype=DType.parse(dtype).numpy))


def full(shape: Sequence[int], value: float, dtype: DType | str = DType.F64) -> Tensor:
    return Tensor._wrap(np.full(tuple(shape), value, dtype=DType.parse(dtype).numpy))


def trunc_normal(
    rng: np.random.Generator,
    shape: Sequence[int],
    std: float,
    bound: float,
    dtype: DType | str = DType.F32,
) -> Tensor:
    """Normal(0, std) samples redrawn until every magnitude is at most ``bound * std``.

    Draw order is fixed (row-major, then redraws in index order), so the result
    depends only on the generator state.
    """
    samples = rng.normal(0.0, std, size=tuple(shape))
    limit = bound * std
    outside = np.abs(samples) > limit
    while np.any(outside):
        samples[outside] = rng.normal(0.0, std, size=int(np.count_nonzero(outside)))
        outside = np.abs(samples) > limit
    return Tensor._wrap(samples.astype(DType.parse(dtype).numpy))


def same_dtype(tensors: Iterable[Tensor]) -> DType:
    """Return the shared element type, raising ``DTypeError`` on a mix."""
    dtypes = {t.dtype for t in tensors}
    if len(dtypes) != 1:
        raise DTypeError(f"Mixed element types: {sorted(d.value for d in dtypes)}")
    return dtypes.pop()
