"""Unit tests for training-step timing."""

import pytest

from src.python.gqkva.bench.timing import measure_tps
from src.python.gqkva.errors import ConfigurationError
from src.python.gqkva.training.optimizer import AdamState


def _step_timer(durations):
    """Timer returning a start and an end tick for each duration in turn."""
    ticks = []
    now = 0.0
    for d in durations:
        ticks += [now, now + d]
        now += d + 1.0
    it = iter(ticks)
    return lambda: next(it)


@pytest.fixture
def fake_step(mocker):
    """Skip the real forward/backward; the timer alone decides the samples."""

    def step(cfg, weights, state, hyper, images, labels, index, decay):
        return 0.0, weights, AdamState(step=index)

    return mocker.patch("src.python.gqkva.bench.timing.training_step", side_effect=step)


class TestMeasureTps:
    """Tests for measure_tps."""

    def test_mean_and_std_of_timed_iterations(self, micro_cfg, fake_step):
        """Warmup is excluded and the timed steps give mean and sample std."""
        # Two warmup steps of 1 s are ignored.
        timer = _step_timer([1.0, 1.0, 0.010, 0.012, 0.014, 0.016, 0.018])
        result = measure_tps(micro_cfg, 4, warmup_iters=2, timed_iters=5, timer=timer)
        assert result.mean_ms == pytest.approx(14.0)
        assert result.std_ms == pytest.approx(3.1622776, rel=1e-6)
        assert len(result.samples_ms) == 5
        assert result.per_sample_ms == pytest.approx(3.5)
        assert fake_step.call_count == 7

    def test_step_indices_advance(self, micro_cfg, fake_step):
        """AdamW step indices count up from 1."""
        measure_tps(micro_cfg, 2, warmup_iters=0, timed_iters=5, timer=_step_timer([0.01] * 5))
        assert [c.args[6] for c in fake_step.call_args_list] == [1, 2, 3, 4, 5]

    def test_too_few_timed_iterations(self, micro_cfg):
        """At least five timed iterations are required."""
        with pytest.raises(ConfigurationError):
            measure_tps(micro_cfg, 2, timed_iters=4)

    def test_negative_warmup(self, micro_cfg):
        """Warmup cannot be negative."""
        with pytest.raises(ConfigurationError):
            measure_tps(micro_cfg, 2, warmup_iters=-1)

    def test_real_steps_run(self, micro_cfg):
        """Unmocked steps produce a positive time."""
        result = measure_tps(micro_cfg, 2, warmup_iters=1, timed_iters=5)
        assert result.mean_ms > 0.0
        assert result.batch_size == 2
