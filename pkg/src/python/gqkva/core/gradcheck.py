"""Central finite-difference gradients and comparison helpers.

Used as the oracle for every backward implementation: the tape gradient of a
scalar function is compared elementwise against ``finite_diff_grad``.
"""

from __future__ import annotations

from typing import Callable, Sequence, Union

import numpy as np

from ..constants import FINITE_DIFF_STEP
from ..errors import ConfigurationError
from .tape import Tape, no_tape
from .tensor import Tensor

ScalarFn = Callable[[Tensor], Union[float, Tensor]]


def _scalar(value: float | Tensor) -> float:
    return value.item() if isinstance(value, Tensor) else float(value)


def finite_diff_grad(f: ScalarFn, x: Tensor, step: float = FINITE_DIFF_STEP) -> Tensor:
    """Gradient of scalar ``f`` at ``x`` by central differences.

    Element ``i`` is ``(f(x + h e_i) - f(x - h e_i)) / 2h``. ``f`` runs with
    recording disabled so an enclosing tape is left untouched.
    """
    if not step > 0:
        raise ConfigurationError(f"finite-difference step must be > 0, got {step}")
    base = x.numpy().astype(np.float64)
    grad = np.zeros(base.size, dtype=np.float64)
    probe = base.reshape(-1).copy()
    with no_tape():
        for i in range(probe.size):
            orig = probe[i]
            probe[i] = orig + step
            f_plus = _scalar(f(Tensor(probe.reshape(x.shape), dtype=x.dtype)))
            probe[i] = orig - step
            f_minus = _scalar(f(Tensor(probe.reshape(x.shape), dtype=x.dtype)))
            probe[i] = orig
            grad[i] = (f_plus - f_minus) / (2.0 * step)
    return Tensor(grad.reshape(x.shape), dtype=x.dtype)


def max_relative_error(actual: Tensor, expected: Tensor, floor: float = 1e-8) -> float:
    """``max|a - e|`` divided by the larger of ``max|a|``, ``max|e|`` and ``floor``.

    Scale-aware rather than per-element so near-zero entries do not dominate.
    """
    a = actual.numpy().astype(np.float64)
    e = expected.numpy().astype(np.float64)
    scale = max(float(np.abs(a).max()), float(np.abs(e).max()), floor)
    return float(np.abs(a - e).max()) / scale


def check_gradients(
    fn: Callable[[Sequence[Tensor]], Tensor],
    inputs: Sequence[Tensor],
    step: float = FINITE_DIFF_STEP,
    floor: float = 1e-8,
) -> list[float]:
    """Compare tape gradients of scalar ``fn(inputs)`` with finite differences.

    Returns the relative error for each input, in input order. ``floor`` is
    passed to ``max_relative_error``; inputs whose true gradient is zero (a key
    bias under softmax shift invariance) need a floor above finite-difference noise.
    """
    with Tape() as tape:
        out = fn(inputs)
    analytic = tape.gradients(out, list(inputs))
    errors = []
    for idx, pair in enumerate(analytic):

        def partial(x: Tensor, idx: int = idx) -> Tensor:
            args = list(inputs)
            args[idx] = x
            return fn(args)

        numeric = finite_diff_grad(partial, inputs[idx], step)
        errors.append(max_relative_error(pair.grad, numeric, floor))
    return errors
