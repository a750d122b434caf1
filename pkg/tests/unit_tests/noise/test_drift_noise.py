import numpy as np
import pytest

from noise.drift_noise import (
    STREAM_JITTER,
    STREAM_PROJECTION,
    DriftModel,
    drift_offset,
    projection_noise_sample,
    sample_shot_offset,
    shot_generator,
)


class TestDriftOffset:
    def test_uncompensated_linear_drift(self):
        model = DriftModel(compensation_rate=0.0, quadratic_residual=0.0)
        assert drift_offset(1200.0, model) == pytest.approx(82.08, rel=1e-12)

    def test_compensated_drift_is_bounded_sawtooth(self):
        model = DriftModel(quadratic_residual=0.0)
        values = np.array([drift_offset(t, model) for t in np.linspace(0.0, 600.0, 6001)])
        assert values.min() >= -1e-12
        assert values.max() <= 0.684 + 1e-12

    def test_compensation_step_resets_offset(self):
        model = DriftModel(quadratic_residual=0.0)
        assert drift_offset(9.999, model) == pytest.approx(0.0684 * 9.999)
        assert drift_offset(10.0, model) == pytest.approx(0.0, abs=1e-12)

    def test_quadratic_residual_accumulates(self):
        model = DriftModel()
        assert drift_offset(1000.0, model) == pytest.approx(2e-5 * 1000.0 ** 2, abs=1e-9)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            drift_offset(-1.0, DriftModel())


class TestShotJitter:
    def test_zero_sigma_gives_pure_drift(self):
        model = DriftModel(shot_jitter_sigma=0.0)
        assert sample_shot_offset(17, 25.0, model) == drift_offset(25.0, model)

    def test_reproducible_for_same_shot(self):
        model = DriftModel(seed=42)
        assert sample_shot_offset(5, 3.0, model) == sample_shot_offset(5, 3.0, model)
        assert sample_shot_offset(5, 3.0, model) != sample_shot_offset(6, 3.0, model)

    def test_seed_changes_sequence(self):
        a = [sample_shot_offset(k, 0.0, DriftModel(seed=1)) for k in range(10)]
        b = [sample_shot_offset(k, 0.0, DriftModel(seed=2)) for k in range(10)]
        assert a != b

    def test_jitter_statistics(self):
        model = DriftModel(compensation_rate=0.0, linear_rate=0.0, quadratic_residual=0.0, seed=7)
        samples = np.array([sample_shot_offset(k, 0.0, model) for k in range(4000)])
        assert samples.std() == pytest.approx(1.5, rel=0.05)
        assert abs(samples.mean()) < 0.1
        centered = samples - samples.mean()
        lag_one = np.dot(centered[:-1], centered[1:]) / np.dot(centered, centered)
        assert abs(lag_one) < 0.05

    @pytest.mark.parametrize("kwargs", [{"shot_jitter_sigma": -1.0}, {"compensation_step_period": 0.0}, {"seed": -1}])
    def test_invalid_model(self, kwargs):
        with pytest.raises(ValueError):
            DriftModel(**kwargs)


class TestProjectionNoise:
    @pytest.mark.parametrize("probability, expected", [(0.0, 0.0), (1.0, 1.0), (-0.2, 0.0), (1.3, 1.0)])
    def test_certain_outcomes(self, probability, expected):
        assert projection_noise_sample(probability, 1000, 3, seed=0) == expected

    def test_fraction_granularity(self):
        value = projection_noise_sample(0.5, 8, 0, seed=0)
        assert (value * 8) == int(value * 8)

    def test_sample_index_gives_independent_draws(self):
        draws = {projection_noise_sample(0.5, 10_000, 0, seed=0, sample_index=k) for k in range(20)}
        assert len(draws) > 1

    def test_binomial_spread(self):
        values = np.array([projection_noise_sample(0.3, 10_000, k, seed=11) for k in range(2000)])
        assert values.mean() == pytest.approx(0.3, abs=1e-3)
        assert values.std() == pytest.approx(np.sqrt(0.3 * 0.7 / 10_000), rel=0.1)

    def test_requires_atoms(self):
        with pytest.raises(ValueError):
            projection_noise_sample(0.5, 0, 0, seed=0)


def test_streams_are_distinct():
    jitter = shot_generator(3, STREAM_JITTER, 9).random()
    projection = shot_generator(3, STREAM_PROJECTION, 9).random()
    assert jitter != projection
    assert shot_generator(3, STREAM_JITTER, 9).random() == jitter
