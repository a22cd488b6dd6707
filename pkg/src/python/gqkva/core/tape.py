"""Forward tape and reverse-mode gradient composition.

Operations in ``ops`` append an ``OpRecord`` to the active ``Tape`` (if any).
``Tape.gradients`` walks the records in reverse and composes each operation's
vector-Jacobian product.

Example:
    >>> with Tape() as tape:
    ...     y = ops.softmax_lastdim(ops.matmul(x, w))
    >>> gx, gw = tape.gradients(y, [x, w], upstream=g)
"""

from __future__ import annotations

from contextlib import contextmanager
from contextvars import ContextVar, Token
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Iterator, Mapping, Optional, Sequence

import numpy as np

from ..errors import DimensionError
from .tensor import GradPair, Tensor

if TYPE_CHECKING:
    from .ops import Op

_ACTIVE_TAPE: ContextVar[Optional["Tape"]] = ContextVar("gqkva_active_tape", default=None)


@dataclass(frozen=True, eq=False)
class OpRecord:
    """One executed operation: inputs, output and whatever its adjoint needs."""

    op: "Op"
    inputs: tuple[Tensor, ...]
    output: Tensor
    saved: Mapping[str, Any] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.op.name


def current_tape() -> Optional["Tape"]:
    return _ACTIVE_TAPE.get()


@contextmanager
def no_tape() -> Iterator[None]:
    """Run the body without recording, even inside an active tape."""
    token = _ACTIVE_TAPE.set(None)
    try:
        yield
    finally:
        _ACTIVE_TAPE.reset(token)


def backward(record: OpRecord, upstream: Tensor) -> tuple[Optional[Tensor], ...]:
    """Vector-Jacobian product of one recorded operation.

    Returns one gradient per input (``None`` for inputs with no gradient).

    Raises:
        DimensionError: ``upstream`` does not have the operation's output shape.
    """
    if upstream.shape != record.output.shape:
        raise DimensionError(
            f"Upstream gradient shape {upstream.shape} does not match "
            f"{record.name} output shape {record.output.shape}"
        )
    grads = record.op.vjp(record, upstream.numpy())
    return tuple(
        None if g is None else Tensor._wrap(_as_dtype(g, t)) for g, t in zip(grads, record.inputs)
    )


def _as_dtype(g: np.ndarray, like: Tensor) -> np.ndarray:
    return np.array(g, dtype=like.dtype.numpy, copy=True)


class Tape:
    """Records operations executed while it is active (``with Tape() as tape:``)."""

    def __init__(self) -> None:
        self._records: list[OpRecord] = []
        self._tokens: list[Token] = []

    def __enter__(self) -> "Tape":
        self._tokens.append(_ACTIVE_TAPE.set(self))
        return self

    def __exit__(self, *exc: Any) -> None:
        _ACTIVE_TAPE.reset(self._tokens.pop())

    def record(self, rec: OpRecord) -> None:
        self._records.append(rec)

    @property
    def records(self) -> tuple[OpRecord, ...]:
        return tuple(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def gradients(
        self,
        output: Tensor,
        sources: Sequence[Tensor],
        upstream: Optional[Tensor] = None,
    ) -> list[GradPair]:
        """Gradients of ``output`` (seeded with ``upstream``) with respect to ``sources``.

        ``upstream`` defaults to ones for single-element outputs. Sources that the
        output does not depend on get zero gradients.
        """
        if upstream is None:
            if output.size != 1:
                raise DimensionError(
                    f"Upstream gradient required for non-scalar output of shape {output.shape}"
                )
            seed = np.ones(output.shape, dtype=output.dtype.numpy)
        else:
            if upstream.shape != output.shape:
                raise DimensionError(
                    f"Upstream gradient shape {upstream.shape} does not match "
                    f"output shape {output.shape}"
                )
            seed = upstream.numpy()

        grads: dict[int, np.ndarray] = {id(output): seed}
        for rec in reversed(self._records):
            g_out = grads.get(id(rec.output))
            if g_out is None:
                continue
            for inp, g_in in zip(rec.inputs, rec.op.vjp(rec, g_out)):
                if g_in is None:
                    continue
                key = id(inp)
                grads[key] = g_in if key not in grads else grads[key] + g_in

        pairs = []
        for src in sources:
            g = grads.get(id(src))
            if g is None:
                g = np.zeros(src.shape, dtype=src.dtype.numpy)
            pairs.append(GradPair(src, Tensor._wrap(_as_dtype(g, src))))
        return pairs
