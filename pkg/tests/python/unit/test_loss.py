"""Unit tests for softmax cross-entropy and accuracy."""

import math

import numpy as np
import pytest

from src.python.gqkva.core.gradcheck import finite_diff_grad
from src.python.gqkva.core.tensor import Tensor
from src.python.gqkva.errors import DimensionError, InputError
from src.python.gqkva.training.loss import accuracy, cross_entropy


class TestCrossEntropy:
    """Tests for cross_entropy."""

    def test_uniform_logits(self):
        """Equal logits give a loss of log(classes)."""
        loss, _ = cross_entropy(Tensor(np.zeros((2, 4))), [1, 3])
        assert loss == pytest.approx(math.log(4))

    def test_confident_correct_is_near_zero(self):
        """A confident correct prediction costs almost nothing."""
        loss, _ = cross_entropy(Tensor([[50.0, 0.0, 0.0]]), [0])
        assert loss == pytest.approx(0.0, abs=1e-12)

    def test_large_logits_stay_finite(self):
        """Huge logits do not overflow."""
        loss, grad = cross_entropy(Tensor([[1000.0, -1000.0]]), [1])
        assert loss == pytest.approx(2000.0)
        assert np.all(np.isfinite(grad.numpy()))

    def test_gradient_rows_sum_to_zero(self, rng):
        """Each row of the gradient sums to zero."""
        _, grad = cross_entropy(Tensor(rng.standard_normal((5, 3))), [0, 1, 2, 0, 1])
        np.testing.assert_allclose(grad.numpy().sum(axis=1), 0.0, atol=1e-15)

    def test_gradient_matches_finite_differences(self, rng):
        """The closed-form gradient agrees with central differences."""
        logits = Tensor(rng.standard_normal((4, 5)))
        labels = [4, 0, 2, 2]
        _, grad = cross_entropy(logits, labels)
        numeric = finite_diff_grad(lambda z: cross_entropy(z, labels)[0], logits)
        np.testing.assert_allclose(grad.numpy(), numeric.numpy(), atol=1e-8)

    def test_keeps_logit_dtype(self):
        """The gradient keeps the logits' element type."""
        _, grad = cross_entropy(Tensor(np.zeros((1, 2)), dtype="f32"), [0])
        assert grad.dtype.value == "f32"

    def test_label_out_of_range(self):
        """A label at or above the class count is rejected."""
        with pytest.raises(InputError):
            cross_entropy(Tensor(np.zeros((2, 3))), [0, 3])

    def test_negative_label(self):
        """Negative labels are rejected."""
        with pytest.raises(InputError):
            cross_entropy(Tensor(np.zeros((1, 3))), [-1])

    def test_batch_mismatch(self):
        """The label count must match the batch."""
        with pytest.raises(DimensionError):
            cross_entropy(Tensor(np.zeros((2, 3))), [0])


class TestAccuracy:
    """Tests for accuracy."""

    def test_fraction_correct(self):
        """Accuracy is the fraction of rows whose argmax matches the label."""
        logits = Tensor([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
        assert accuracy(logits, [0, 1, 1, 1]) == pytest.approx(0.75)
