"""Unit tests for the recording tape and gradient composition."""

import numpy as np
import pytest

from src.python.gqkva.core import ops
from src.python.gqkva.core.tape import Tape, current_tape, no_tape
from src.python.gqkva.core.tensor import Tensor
from src.python.gqkva.errors import DimensionError


class TestRecording:
    """Tests for Tape recording."""

    def test_ops_outside_a_tape_are_not_recorded(self):
        """With no active tape ops run without recording."""
        assert current_tape() is None
        ops.add(Tensor([1.0]), Tensor([2.0]))

    def test_records_in_execution_order(self):
        """Records are kept in the order ops ran."""
        x = Tensor([[1.0, 2.0]])
        with Tape() as tape:
            y = ops.scale(x, 2.0)
            ops.sum_all(y)
        assert [r.name for r in tape.records] == ["scale", "sum_all"]

    def test_no_tape_suspends_recording(self):
        """no_tape pauses recording for its block only."""
        with Tape() as tape:
            with no_tape():
                ops.gelu(Tensor([1.0]))
            ops.gelu(Tensor([1.0]))
        assert len(tape) == 1

    def test_nested_tapes_restore_outer(self):
        """Leaving an inner tape reactivates the outer one."""
        with Tape() as outer:
            with Tape() as inner:
                assert current_tape() is inner
            assert current_tape() is outer


class TestGradients:
    """Tests for Tape.gradients."""

    def test_reused_input_accumulates(self):
        """An input used twice receives the sum of both adjoints."""
        x = Tensor([3.0])
        with Tape() as tape:
            y = ops.sum_all(ops.add(x, x))
        (pair,) = tape.gradients(y, [x])
        assert pair.grad.numpy().tolist() == [2.0]

    def test_unreached_source_gets_zeros(self):
        """A source the output does not depend on gets a zero gradient."""
        x, unused = Tensor([1.0, 2.0]), Tensor([[5.0]])
        with Tape() as tape:
            y = ops.sum_all(x)
        _, pair = tape.gradients(y, [x, unused])
        assert pair.grad.numpy().tolist() == [[0.0]]

    def test_non_scalar_output_needs_upstream(self):
        """A non-scalar output needs an explicit upstream gradient."""
        x = Tensor([1.0, 2.0])
        with Tape() as tape:
            y = ops.scale(x, 3.0)
        with pytest.raises(DimensionError):
            tape.gradients(y, [x])
        (pair,) = tape.gradients(y, [x], upstream=Tensor([1.0, -1.0]))
        assert pair.grad.numpy().tolist() == [3.0, -3.0]

    def test_upstream_shape_checked(self):
        """The upstream must match the output shape."""
        x = Tensor([1.0, 2.0])
        with Tape() as tape:
            y = ops.scale(x, 3.0)
        with pytest.raises(DimensionError):
            tape.gradients(y, [x], upstream=Tensor([1.0]))

    def test_gradient_keeps_source_dtype(self):
        """Gradients keep the element type of their source."""
        x = Tensor(np.ones((2, 2)), dtype="f32")
        with Tape() as tape:
            y = ops.sum_all(ops.gelu(x))
        (pair,) = tape.gradients(y, [x])
        assert pair.grad.dtype == x.dtype
