"""Tensor operations with explicit adjoints.

Each operation is an ``Op`` with a ``forward`` kernel over numpy arrays and a
``vjp`` that maps the upstream gradient to one gradient per input. The public
functions at the bottom of the module run the kernel, wrap the result in a
``Tensor`` and append an ``OpRecord`` to the active tape.

All operations are pure. ``matmul`` accumulates over the inner extent in a
fixed left-to-right order, so results are byte-stable across runs.
"""

from __future__ import annotations

import math
from typing import Any, Optional, Sequence

import numpy as np

from ..errors import ConfigurationError, DimensionError
from .tape import OpRecord, current_tape
from .tensor import Tensor, same_dtype

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_erf = np.vectorize(math.erf, otypes=[np.float64])


class Op:
    """An operation: ``forward`` returns ``(output, saved)``; ``vjp`` returns input grads."""

    name = "op"

    def forward(self, *arrays: np.ndarray, **attrs: Any) -> tuple[np.ndarray, dict[str, Any]]:
        raise NotImplementedError

    def vjp(self, record: OpRecord, g: np.ndarray) -> tuple[Optional[np.ndarray], ...]:
        raise NotImplementedError


def _apply(op: Op, inputs: Sequence[Tensor], **attrs: Any) -> Tensor:
    dtype = same_dtype(inputs)
    out, saved = op.forward(*(t.numpy() for t in inputs), **attrs)
    output = Tensor._wrap(np.asarray(out, dtype=dtype.numpy))
    tape = current_tape()
    if tape is not None:
        tape.record(OpRecord(op, tuple(inputs), output, {**saved, **attrs}))
    return output


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``g`` down to ``shape`` (reverse of numpy broadcasting)."""
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (gs, s) in enumerate(zip(g.shape, shape)) if s == 1 and gs != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


# ---------------------------------------------------------------------------
# matmul
# ---------------------------------------------------------------------------


def matmul_kernel(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``a @ b`` with each output element summed over k strictly left to right.

    Leading batch extents broadcast numpy-style. Every output element is
    ``((0 + a0*b0) + a1*b1) + ...``, the same order as a scalar triple loop.
    """
    out_shape = np.broadcast_shapes(a.shape[:-1] + (1,), b.shape[:-2] + (1, b.shape[-1]))
    out = np.zeros(out_shape, dtype=np.result_type(a, b))
    for p in range(a.shape[-1]):
        out += a[..., :, p : p + 1] * b[..., p : p + 1, :]
    return out


def _check_matmul_shapes(a: tuple[int, ...], b: tuple[int, ...]) -> None:
    if len(a) < 2 or len(b) < 2 or a[-1] != b[-2]:
        raise DimensionError(f"matmul shape mismatch: {a} x {b}")
    batch_a, batch_b = a[:-2], b[:-2]
    if batch_a and batch_b and batch_a != batch_b:
        raise DimensionError(f"matmul batch extents differ: {a} x {b}")


class MatMul(Op):
    name = "matmul"

    def forward(self, a, b):
        _check_matmul_shapes(a.shape, b.shape)
        return matmul_kernel(a, b), {}

    def vjp(self, record, g):
        a, b = (t.numpy() for t in record.inputs)
        if b.ndim == 2 and a.ndim > 2:
            ga = matmul_kernel(g, b.T)
            gb = matmul_kernel(a.reshape(-1, a.shape[-1]).T, g.reshape(-1, g.shape[-1]))
        elif a.ndim == 2 and b.ndim > 2:
            ga = matmul_kernel(g.swapaxes(-1, -2).reshape(-1, g.shape[-2]).T, _flat_rows(b))
            gb = matmul_kernel(a.T, g)
        else:
            ga = matmul_kernel(g, b.swapaxes(-1, -2))
            gb = matmul_kernel(a.swapaxes(-1, -2), g)
        return ga, gb


def _flat_rows(b: np.ndarray) -> np.ndarray:
    # [.., k, n] -> [(.., n), k], rows aligned with the columns of the flattened g^T
    return b.swapaxes(-1, -2).reshape(-1, b.shape[-2])


# ---------------------------------------------------------------------------
# elementwise and structural ops
# ---------------------------------------------------------------------------


class Add(Op):
    name = "add"

    def forward(self, a, b):
        try:
            out = a + b
        except ValueError as e:
            raise DimensionError(f"add shape mismatch: {a.shape} + {b.shape}") from e
        return out, {}

    def vjp(self, record, g):
        a, b = record.inputs
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)


class Scale(Op):
    name = "scale"

    def forward(self, x, factor):
        return x * x.dtype.type(factor), {}

    def vjp(self, record, g):
        return (g * g.dtype.type(record.saved["factor"]),)


class Transpose(Op):
    name = "transpose"

    def forward(self, x, axes):
        if sorted(axes) != list(range(x.ndim)):
            raise DimensionError(f"transpose axes {axes} invalid for shape {x.shape}")
        return np.transpose(x, axes), {}

    def vjp(self, record, g):
        return (np.transpose(g, np.argsort(record.saved["axes"])),)


class Reshape(Op):
    name = "reshape"

    def forward(self, x, shape):
        try:
            return x.reshape(shape), {}
        except ValueError as e:
            raise DimensionError(f"cannot reshape {x.shape} to {shape}") from e

    def vjp(self, record, g):
        return (g.reshape(record.inputs[0].shape),)


class Concat(Op):
    name = "concat"

    def forward(self, *xs, axis):
        try:
            return np.concatenate(xs, axis=axis), {}
        except ValueError as e:
            shapes = [x.shape for x in xs]
            raise DimensionError(f"concat shape mismatch along axis {axis}: {shapes}") from e

    def vjp(self, record, g):
        axis = record.saved["axis"]
        offsets = np.cumsum([t.shape[axis] for t in record.inputs])[:-1]
        return tuple(np.split(g, offsets, axis=axis))


class SliceAxis(Op):
    name = "slice_axis"

    def forward(self, x, axis, start, stop):
        if not 0 <= start < stop <= x.shape[axis]:
            raise DimensionError(
                f"slice [{start}:{stop}] out of range for axis {axis} of {x.shape}"
            )
        index = [slice(None)] * x.ndim
        index[axis] = slice(start, stop)
        return x[tuple(index)], {}

    def vjp(self, record, g):
        x = record.inputs[0]
        axis, start, stop = (record.saved[k] for k in ("axis", "start", "stop"))
        full = np.zeros(x.shape, dtype=g.dtype)
        index = [slice(None)] * x.ndim
        index[axis] = slice(start, stop)
        full[tuple(index)] = g
        return (full,)


class BroadcastTo(Op):
    name = "broadcast_to"

    def forward(self, x, shape):
        try:
            return np.broadcast_to(x, shape).copy(), {}
        except ValueError as e:
            raise DimensionError(f"cannot broadcast {x.shape} to {shape}") from e

    def vjp(self, record, g):
        return (_unbroadcast(g, record.inputs[0].shape),)


class SumAll(Op):
    name = "sum_all"

    def forward(self, x):
        return np.asarray(x.sum()), {}

    def vjp(self, record, g):
        return (np.broadcast_to(g, record.inputs[0].shape).copy(),)


# ---------------------------------------------------------------------------
# softmax, layernorm, gelu
# ---------------------------------------------------------------------------


class SoftmaxLastDim(Op):
    name = "softmax_lastdim"

    def forward(self, x):
        if x.ndim == 0 or x.shape[-1] < 1:
            raise DimensionError(f"softmax needs a non-empty last dimension, got {x.shape}")
        e = np.exp(x - x.max(axis=-1, keepdims=True))
        y = e / e.sum(axis=-1, keepdims=True)
        return y, {"y": y}

    def vjp(self, record, g):
        y = record.saved["y"]
        return (y * (g - (g * y).sum(axis=-1, keepdims=True)),)


class LayerNorm(Op):
    name = "layernorm"

    def forward(self, x, gamma, beta, eps):
        n = x.shape[-1]
        if gamma.shape != (n,) or beta.shape != (n,):
            raise DimensionError(
                f"layernorm affine shapes {gamma.shape}, {beta.shape} do not match last extent {n}"
            )
        if not eps > 0:
            raise ConfigurationError(f"layernorm eps must be > 0, got {eps}")
        mu = x.mean(axis=-1, keepdims=True)
        xc = x - mu
        inv_std = 1.0 / np.sqrt((xc * xc).mean(axis=-1, keepdims=True) + eps)
        xhat = xc * inv_std
        return xhat * gamma + beta, {"xhat": xhat, "inv_std": inv_std}

    def vjp(self, record, g):
        x, gamma, _ = (t.numpy() for t in record.inputs)
        xhat, inv_std = record.saved["xhat"], record.saved["inv_std"]
        n = x.shape[-1]
        dxhat = g * gamma
        dx = (inv_std / n) * (
            n * dxhat
            - dxhat.sum(axis=-1, keepdims=True)
            - xhat * (dxhat * xhat).sum(axis=-1, keepdims=True)
        )
        dgamma = (g * xhat).reshape(-1, n).sum(axis=0)
        dbeta = g.reshape(-1, n).sum(axis=0)
        return dx, dgamma, dbeta


class Gelu(Op):
    """Exact GELU: ``0.5 * x * (1 + erf(x / sqrt(2)))``."""

    name = "gelu"

    def forward(self, x):
        cdf = 0.5 * (1.0 + _erf(x.astype(np.float64) * _INV_SQRT2))
        return x * cdf.astype(x.dtype), {"cdf": cdf}

    def vjp(self, record, g):
        x = record.inputs[0].numpy().astype(np.float64)
        pdf = np.exp(-0.5 * x * x) * _INV_SQRT_2PI
        return (g * (record.saved["cdf"] + x * pdf).astype(g.dtype),)


_MATMUL = MatMul()
_ADD = Add()
_SCALE = Scale()
_TRANSPOSE = Transpose()
_RESHAPE = Reshape()
_CONCAT = Concat()
_SLICE = SliceAxis()
_BROADCAST = BroadcastTo()
_SUM = SumAll()
_SOFTMAX = SoftmaxLastDim()
_LAYERNORM = LayerNorm()
_GELU = Gelu()

OPS: dict[str, Op] = {
    op.name: op
    for op in (
        _MATMUL,
        _ADD,
        _SCALE,
        _TRANSPOSE,
        _RESHAPE,
        _CONCAT,
        _SLICE,
        _BROADCAST,
        _SUM,
        _SOFTMAX,
        _LAYERNORM,
        _GELU,
    )
}


# ---------------------------------------------------------------------------
# Public functional API
# ---------------------------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """``[.., m, k] x [.., k, n] -> [.., m, n]``; one side may omit the batch extents."""
    return _apply(_MATMUL, (a, b))


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum with numpy broadcasting (used for biases and residuals)."""
    return _apply(_ADD, (a, b))


def scale(x: Tensor, factor: float) -> Tensor:
    return _apply(_SCALE, (x,), factor=float(factor))


def transpose(x: Tensor, axes: Optional[Sequence[int]] = None) -> Tensor:
    """Permute axes; by default swap the last two."""
    if axes is None:
        if x.ndim < 2:
            raise DimensionError(f"transpose needs at least 2 dimensions, got {x.shape}")
        axes = tuple(range(x.ndim - 2)) + (x.ndim - 1, x.ndim - 2)
    return _apply(_TRANSPOSE, (x,), axes=tuple(int(a) for a in axes))


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    return _apply(_RESHAPE, (x,), shape=tuple(int(s) for s in shape))


def concat(xs: Sequence[Tensor], axis: int = -1) -> Tensor:
    if not xs:
        raise DimensionError("concat needs at least one tensor")
    return _apply(_CONCAT, tuple(xs), axis=int(axis))


def slice_axis(x: Tensor, axis: int, start: int, stop: int) -> Tensor:
    """``x[..., start:stop, ...]`` along ``axis``."""
    return _apply(_SLICE, (x,), axis=int(axis) % x.ndim, start=int(start), stop=int(stop))


def broadcast_to(x: Tensor, shape: Sequence[int]) -> Tensor:
    return _apply(_BROADCAST, (x,), shape=tuple(int(s) for s in shape))


def sum_all(x: Tensor) -> Tensor:
    """Sum of all elements as a zero-dimensional tensor."""
    return _apply(_SUM, (x,))


def softmax_lastdim(x: Tensor) -> Tensor:
    """Softmax over the last dimension, computed with max subtraction."""
    return _apply(_SOFTMAX, (x,))


def layernorm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float) -> Tensor:
    """Normalise each last-dimension slice to zero mean and unit variance, then apply affine."""
    return _apply(_LAYERNORM, (x, gamma, beta), eps=float(eps))


def gelu(x: Tensor) -> Tensor:
    return _apply(_GELU, (x,))
