"""Unit tests for AdamW and the learning-rate schedules."""

import numpy as np
import pytest

from src.python.gqkva.core.tensor import Tensor
from src.python.gqkva.errors import ConfigurationError, DimensionError
from src.python.gqkva.training.optimizer import AdamState, Schedule, TrainHyper, adamw_step

# ---------------------------------------------------------------------------
# Hyperparameters and schedules
# ---------------------------------------------------------------------------


class TestTrainHyper:
    """Tests for TrainHyper validation."""

    def test_zero_lr_allowed(self):
        """A learning rate of zero is accepted."""
        assert TrainHyper(lr=0.0).lr == 0.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"lr": -1e-3},
            {"lr": float("nan")},
            {"betas": (0.9, 1.0)},
            {"eps": 0.0},
            {"weight_decay": -0.1},
            {"batch_size": 0},
            {"steps": 0},
            {"steps": 5, "warmup_steps": 5},
        ],
    )
    def test_invalid_values(self, kwargs):
        """Out-of-range hyperparameters are configuration errors."""
        with pytest.raises(ConfigurationError):
            TrainHyper(**kwargs)

    def test_schedule_from_string(self):
        assert TrainHyper(schedule="constant").schedule is Schedule.CONSTANT


class TestLrAt:
    """Tests for TrainHyper.lr_at."""

    def test_constant(self):
        """A constant schedule returns the peak rate at every step."""
        hyper = TrainHyper(lr=0.1, steps=10, schedule="constant")
        assert [hyper.lr_at(s) for s in (1, 5, 10)] == [0.1, 0.1, 0.1]

    def test_cosine_starts_at_peak_and_decreases(self):
        """Cosine decay starts at the peak and falls strictly."""
        hyper = TrainHyper(lr=0.1, steps=10, schedule="cosine")
        rates = [hyper.lr_at(s) for s in range(1, 11)]
        assert rates[0] == pytest.approx(0.1)
        assert all(a > b for a, b in zip(rates, rates[1:]))
        assert rates[-1] > 0.0

    def test_linear_warmup(self):
        """Warmup ramps linearly up to the peak."""
        hyper = TrainHyper(lr=0.1, steps=10, warmup_steps=4, schedule="constant")
        assert hyper.lr_at(1) == pytest.approx(0.025)
        assert hyper.lr_at(4) == pytest.approx(0.1)
        assert hyper.lr_at(5) == pytest.approx(0.1)

    def test_cosine_after_warmup_starts_at_peak(self):
        """Cosine decay begins at the peak once warmup ends."""
        hyper = TrainHyper(lr=0.2, steps=10, warmup_steps=2, schedule="cosine")
        assert hyper.lr_at(3) == pytest.approx(0.2)


# ---------------------------------------------------------------------------
# AdamW
# ---------------------------------------------------------------------------


class TestAdamwStep:
    """Tests for adamw_step."""

    def test_first_step_moves_by_lr_times_sign(self):
        """The bias-corrected first step moves each weight by lr in the gradient's sign."""
        hyper = TrainHyper(lr=0.01, weight_decay=0.0, schedule="constant")
        w = {"w": Tensor([[1.0, -1.0]])}
        g = {"w": Tensor([[0.5, -2.0]])}
        new, state = adamw_step(w, g, AdamState(), hyper, 1)
        np.testing.assert_allclose(new["w"].numpy(), [[0.99, -0.99]], atol=1e-7)
        assert state.step == 1

    def test_decoupled_decay_only_on_named_params(self):
        """Weight decay applies only to parameters named in the decay set."""
        hyper = TrainHyper(lr=0.1, weight_decay=0.5, schedule="constant")
        w = {"a": Tensor([[2.0]]), "b": Tensor([2.0])}
        g = {"a": Tensor([[0.0]]), "b": Tensor([0.0])}
        new, _ = adamw_step(w, g, AdamState(), hyper, 1)
        assert new["a"].numpy()[0, 0] == pytest.approx(2.0 - 0.1 * 0.5 * 2.0)
        assert new["b"].numpy()[0] == pytest.approx(2.0)

    def test_explicit_decay_set(self):
        """An empty decay set turns decay off."""
        hyper = TrainHyper(lr=0.1, weight_decay=0.5, schedule="constant")
        w = {"a": Tensor([[2.0]])}
        new, _ = adamw_step(w, {"a": Tensor([[0.0]])}, AdamState(), hyper, 1, decay=set())
        assert new["a"].numpy()[0, 0] == pytest.approx(2.0)

    def test_zero_lr_freezes(self, rng):
        """lr 0 leaves the weights bit-identical."""
        hyper = TrainHyper(lr=0.0)
        w = {"w": Tensor(rng.standard_normal((3, 3)))}
        g = {"w": Tensor(rng.standard_normal((3, 3)))}
        new, _ = adamw_step(w, g, AdamState(), hyper, 1)
        np.testing.assert_array_equal(new["w"].numpy(), w["w"].numpy())

    def test_inputs_not_modified(self, rng):
        """The input weights are not changed in place."""
        w = {"w": Tensor(rng.standard_normal((2, 2)))}
        before = w["w"].numpy().copy()
        adamw_step(w, {"w": Tensor(np.ones((2, 2)))}, AdamState(), TrainHyper(), 1)
        np.testing.assert_array_equal(w["w"].numpy(), before)

    def test_moments_accumulate(self):
        """First moments carry over between steps."""
        hyper = TrainHyper(schedule="constant")
        w = {"w": Tensor([1.0])}
        g = {"w": Tensor([1.0])}
        _, s1 = adamw_step(w, g, AdamState(), hyper, 1)
        _, s2 = adamw_step(w, g, s1, hyper, 2)
        assert s2.m["w"][0] == pytest.approx(0.1 + 0.9 * 0.1)

    def test_keeps_weight_dtype(self):
        """Updated weights keep their element type."""
        w = {"w": Tensor([1.0], dtype="f32")}
        new, _ = adamw_step(w, {"w": Tensor([1.0], dtype="f32")}, AdamState(), TrainHyper(), 1)
        assert new["w"].dtype.value == "f32"

    def test_mismatched_names(self):
        """Gradients must name the same parameters as the weights."""
        with pytest.raises(DimensionError):
            adamw_step({"a": Tensor([1.0])}, {"b": Tensor([1.0])}, AdamState(), TrainHyper(), 1)

    def test_step_index_is_one_based(self):
        """Step 0 is rejected."""
        with pytest.raises(ConfigurationError):
            adamw_step({"a": Tensor([1.0])}, {"a": Tensor([1.0])}, AdamState(), TrainHyper(), 0)
