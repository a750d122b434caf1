import math

import numpy as np
import pytest

from models.drive_model import (
    TWO_PI,
    DriveParams,
    QubitState,
    crossing_times,
    detuning_slope,
    effective_detuning,
    eigen_frame,
    hamiltonian,
)
from models.errors import ConfigError, DegenerateFrame, NoCrossing


class TestDriveParams:
    def test_from_hz_converts_modulation_frequency(self, fast_drive):
        assert fast_drive.mod_freq == pytest.approx(TWO_PI * 200.0)
        assert fast_drive.period == pytest.approx(5e-3)
        assert fast_drive.is_driven

    @pytest.mark.parametrize("kwargs", [
        {"g_bare": -1.0, "amplitude": 1.0, "mod_freq": 1.0},
        {"g_bare": 1.0, "amplitude": -1.0, "mod_freq": 1.0},
        {"g_bare": 1.0, "amplitude": 1.0, "mod_freq": 0.0},
    ])
    def test_invalid_parameters_raise(self, kwargs):
        with pytest.raises(ValueError):
            DriveParams(**kwargs)

    def test_replace_keeps_other_fields(self, fast_drive):
        shifted = fast_drive.replace(static_detuning=5.0)
        assert shifted.static_detuning == 5.0
        assert shifted.amplitude == fast_drive.amplitude
        assert shifted.to_dict()["mod_freq_hz"] == pytest.approx(200.0)


class TestQubitState:
    def test_unnormalized_state_is_rejected(self):
        with pytest.raises(ValueError):
            QubitState(1.0, 1.0)

    def test_populations(self):
        state = QubitState(1 / math.sqrt(2), 1j / math.sqrt(2))
        assert state.p_e == pytest.approx(0.5)
        assert state.p_g == pytest.approx(0.5)
        assert state.norm_deviation < 1e-15


class TestDetuning:
    def test_zero_static_detuning_starts_at_peak(self, fast_drive):
        assert effective_detuning(0.0, fast_drive) == pytest.approx(13.3 * fast_drive.mod_freq)

    def test_array_input(self, fast_drive):
        t = np.linspace(0, fast_drive.period, 11)
        values = effective_detuning(t, fast_drive)
        assert values.shape == t.shape
        assert values[0] == pytest.approx(values[-1])

    def test_slope_is_derivative(self, fast_drive):
        t, h = 1.3e-3, 1e-9
        numeric = (effective_detuning(t + h, fast_drive) - effective_detuning(t - h, fast_drive)) / (2 * h)
        assert detuning_slope(t, fast_drive) == pytest.approx(numeric, rel=1e-5)


class TestCrossingTimes:
    def test_resonant_drive_crosses_at_quarter_periods(self, fast_drive):
        times = crossing_times(fast_drive, (0.0, fast_drive.period))
        assert times == pytest.approx([fast_drive.period / 4, 3 * fast_drive.period / 4], abs=1e-12)

    def test_two_crossings_per_period(self, slow_drive):
        times = crossing_times(slow_drive, (0.0, 4 * slow_drive.period))
        assert len(times) == 8
        assert all(b > a for a, b in zip(times, times[1:]))

    def test_detuned_crossing_position(self):
        # cos(ws t) = sqrt(3)/2 puts the crossings at ws t = pi/6 and 11 pi/6
        amplitude, f_s = 10.0, 100.0
        drive = DriveParams.from_hz(50.0, amplitude, f_s, static_detuning=-amplitude * f_s * math.sqrt(3) / 2)
        times = crossing_times(drive, (0.0, drive.period))
        assert times == pytest.approx([drive.period / 12, 11 * drive.period / 12], abs=1e-12)
        for t in times:
            assert abs(effective_detuning(t, drive)) < 1e-6 * amplitude * drive.mod_freq

    def test_undriven_has_no_crossing(self, rabi_drive):
        with pytest.raises(NoCrossing):
            crossing_times(rabi_drive, (0.0, 1.0))

    def test_detuning_beyond_sweep_has_no_crossing(self):
        drive = DriveParams.from_hz(100.0, 1.0, 200.0, static_detuning=250.0)
        with pytest.raises(NoCrossing):
            crossing_times(drive, (0.0, 1.0))


def _random_drives(count, seed=5):
    rng = np.random.default_rng(seed)
    drives = []
    for _ in range(count):
        amplitude = rng.uniform(0.5, 30.0)
        f_s = rng.uniform(10.0, 500.0)
        drives.append(DriveParams.from_hz(
            rng.uniform(10.0, 500.0),
            amplitude,
            f_s,
            static_detuning=rng.uniform(-0.9, 0.9) * amplitude * f_s,
            initial_phase=rng.uniform(0.0, TWO_PI),
        ))
    return drives


class TestDriveInvariants:
    @pytest.mark.parametrize("drive", _random_drives(5))
    def test_detuning_is_periodic(self, drive):
        t = np.random.default_rng(17).uniform(0.0, drive.period, 10)
        scale = drive.amplitude * drive.mod_freq + abs(TWO_PI * drive.static_detuning)
        for n in range(1, 6):
            shifted = effective_detuning(t + n * drive.period, drive)
            assert shifted == pytest.approx(effective_detuning(t, drive), rel=1e-12, abs=1e-12 * scale)

    @pytest.mark.parametrize("drive", _random_drives(5))
    def test_crossings_alternate_slope_sign(self, drive):
        times = crossing_times(drive, (0.0, 5 * drive.period))
        signs = np.sign([detuning_slope(t, drive) for t in times])
        assert len(times) >= 9
        assert np.all(signs[1:] == -signs[:-1])

    @pytest.mark.parametrize("drive", _random_drives(5))
    def test_gap_equals_coupling_at_every_crossing(self, drive):
        for t in crossing_times(drive, (0.0, 5 * drive.period)):
            frame = eigen_frame(t, drive, drive.g_bare)
            assert frame.gap == pytest.approx(TWO_PI * drive.g_bare, rel=1e-6)


class TestEigenFrame:
    def test_far_positive_detuning_upper_state_is_excited(self):
        drive = DriveParams.from_hz(1.0, 0.0, 100.0, static_detuning=1e4)
        frame = eigen_frame(0.0, drive, 1.0)
        assert abs(frame.upper_vector()[1]) ** 2 == pytest.approx(1.0, abs=1e-8)

    def test_crossing_mixing_angle_is_half_pi(self, fast_drive):
        t = crossing_times(fast_drive, (0.0, fast_drive.period))[0]
        frame = eigen_frame(t, fast_drive, 120.0)
        assert frame.mixing_angle == pytest.approx(math.pi / 2, abs=1e-9)
        assert frame.gap == pytest.approx(TWO_PI * 120.0, rel=1e-9)

    def test_basis_diagonalizes_hamiltonian(self, fast_drive):
        t = 0.7e-3
        frame = eigen_frame(t, fast_drive, 120.0)
        rotated = frame.basis().T @ hamiltonian(t, fast_drive, 120.0) @ frame.basis()
        assert rotated[0, 0].real == pytest.approx(frame.gap / 2, rel=1e-12)
        assert rotated[1, 1].real == pytest.approx(-frame.gap / 2, rel=1e-12)
        assert abs(rotated[0, 1]) < 1e-9 * frame.gap

    def test_degenerate_frame(self):
        drive = DriveParams.from_hz(0.0, 0.0, 100.0)
        with pytest.raises(DegenerateFrame):
            eigen_frame(0.0, drive, 0.0)

    def test_negative_coupling_rejected(self, fast_drive):
        with pytest.raises(ValueError):
            eigen_frame(0.0, fast_drive, -1.0)


def test_hamiltonian_is_hermitian(fast_drive):
    h = hamiltonian(1e-3, fast_drive, 120.0)
    assert np.allclose(h, h.conj().T)


def test_config_error_names_line_and_field():
    error = ConfigError("unknown configuration key", field="amplitud", line=3)
    assert str(error) == "line 3: field 'amplitud': unknown configuration key"
