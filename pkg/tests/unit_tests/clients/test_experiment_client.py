import math

import numpy as np
import pytest

from analysis.fringe_analysis import line_asymmetry
from clients.experiment_client import Scenario, run_scenario, scenario_bins, to_adiabatic
from ensembles.lattice_ensemble import LatticeConfig
from models.drive_model import DriveParams, QubitState
from propagators.midpoint_propagator import MidpointExponentialPropagator, choose_step
from registries.standards.model_standards import (
    axis_detuning,
    col_p_e_mean,
    col_p_e_stderr,
    col_shots,
    col_time,
)

FREE_LATTICE = LatticeConfig(eta_z=0.0, eta_x=0.0)


def _times(drive, periods=1, per_period=20):
    return tuple(np.linspace(0.0, periods * drive.period, periods * per_period + 1))


class TestScenarioValidation:
    @pytest.mark.parametrize("changes", [
        {"scan_points": ()},
        {"scan_points": (0.0, 1e-3, 1e-3)},
        {"scan_points": (-1e-3, 0.0)},
        {"basis_out": "sideways"},
        {"scan_axis": "amplitude"},
        {"scan_axis": axis_detuning, "scan_points": (-10.0, 10.0)},
        {"shots_per_point": 0},
        {"atoms_per_shot": 0},
        {"jobs": 0},
    ])
    def test_invalid_scenarios(self, fast_drive, changes):
        base = {"drive": fast_drive, "scan_points": (0.0, 1e-3)}
        base.update(changes)
        with pytest.raises(ValueError):
            Scenario(**base)

    def test_to_dict_omits_parallelism(self, fast_drive):
        record = Scenario(drive=fast_drive, scan_points=(0.0, 1e-3), jobs=3).to_dict()
        assert "jobs" not in record
        assert record["scan_points"] == [0.0, 1e-3]


class TestToAdiabatic:
    def test_ground_state_far_above_resonance_is_lower_state(self, fast_drive):
        p_minus, p_plus = to_adiabatic(QubitState.ground(), fast_drive, 120.0, 0.0)
        assert p_minus > 0.99
        assert p_minus + p_plus == pytest.approx(1.0)

    def test_vector_and_state_agree(self, fast_drive):
        state = QubitState(0.6, 0.8j)
        assert to_adiabatic(state, fast_drive, 120.0, 1e-3) == pytest.approx(
            to_adiabatic(np.array([0.6, 0.8j]), fast_drive, 120.0, 1e-3)
        )

    def test_incoherent_basis_state_matches_coherent(self, fast_drive):
        assert to_adiabatic(1.0, fast_drive, 120.0, 0.4e-3) == pytest.approx(
            to_adiabatic(QubitState.excited(), fast_drive, 120.0, 0.4e-3)
        )

    def test_half_mixture_is_half_in_every_basis(self, fast_drive):
        assert to_adiabatic(0.5, fast_drive, 120.0, 0.3e-3) == pytest.approx((0.5, 0.5))

    def test_unnormalized_vector_rejected(self, fast_drive):
        with pytest.raises(ValueError):
            to_adiabatic(np.array([1.0, 1.0]), fast_drive, 120.0, 0.0)

    def test_probability_out_of_range_rejected(self, fast_drive):
        with pytest.raises(ValueError):
            to_adiabatic(1.2, fast_drive, 120.0, 0.0)


class TestRunScenario:
    def test_zero_coupling_stays_in_ground_state(self):
        drive = DriveParams.from_hz(0.0, 13.3, 200.0)
        result = run_scenario(Scenario(drive=drive, scan_points=_times(drive), single_mode=True))
        assert np.all(result.p_e_mean < 1e-12)

    def test_single_mode_matches_bare_propagator(self, fast_drive):
        times = _times(fast_drive, periods=2)
        scenario = Scenario(drive=fast_drive, lattice=FREE_LATTICE, scan_points=times, single_mode=True)
        result = run_scenario(scenario)
        dt = choose_step(fast_drive, 120.0, scenario.accuracy_target, horizon=times[-1])
        trace = MidpointExponentialPropagator(dt=dt).run_trace(fast_drive, 120.0, times)
        assert np.array_equal(result.p_e_mean, trace.p_e)
        assert np.array_equal(result.axis_values, np.array(times))
        assert result.metadata["steps_s"] == [dt]

    def test_frame_layout(self, fast_drive):
        result = run_scenario(Scenario(drive=fast_drive, scan_points=_times(fast_drive), single_mode=True))
        assert result.frame.columns[0] == col_time
        assert (result.frame[col_shots] == 1).all()
        assert (result.frame[col_p_e_stderr] == 0.0).all()
        assert result.metadata["seed"] == 0

    def test_projection_stderr_scales_with_shots(self, rabi_drive):
        # pi/2 pulse at 320 Hz leaves p_e = 1/2
        scenario = Scenario(
            drive=rabi_drive,
            lattice=FREE_LATTICE,
            scan_points=(1.0 / (4 * 320.0),),
            single_mode=True,
            atoms_per_shot=100,
            seed=5,
        )
        few = run_scenario(scenario.replace(shots_per_point=2000)).p_e_stderr[0]
        many = run_scenario(scenario.replace(shots_per_point=8000)).p_e_stderr[0]
        assert few / many == pytest.approx(2.0, rel=0.05)
        assert few == pytest.approx(math.sqrt(0.25 / 100 / 2000), rel=0.05)

    def test_undriven_detuning_scan_is_symmetric(self, rabi_drive):
        detunings = tuple(np.linspace(-400.0, 400.0, 9))
        scenario = Scenario(
            drive=rabi_drive,
            lattice=FREE_LATTICE,
            scan_axis=axis_detuning,
            scan_points=detunings,
            detection_time=1.0 / (2 * 320.0),
            single_mode=True,
        )
        p_e = run_scenario(scenario).p_e_mean
        assert p_e == pytest.approx(p_e[::-1], abs=1e-9)
        assert p_e[4] == pytest.approx(1.0, abs=1e-6)
        assert np.argmax(p_e) == 4

    def test_driven_detuning_scan_is_asymmetric(self, fast_drive):
        scenario = Scenario(
            drive=fast_drive,
            lattice=FREE_LATTICE,
            scan_axis=axis_detuning,
            scan_points=tuple(np.linspace(-400.0, 400.0, 41)),
            detection_time=7.5e-3,
            single_mode=True,
            shots_per_point=4,
            atoms_per_shot=10_000,
        )
        result = run_scenario(scenario)
        asymmetry = line_asymmetry(result.axis_values, result.p_e_mean, result.p_e_stderr)
        assert asymmetry.n_pairs == 20
        assert asymmetry.max_significance > 3

    def test_noisy_run_is_reproducible_and_independent_of_jobs(self, fast_drive):
        scenario = Scenario(
            drive=fast_drive,
            lattice=FREE_LATTICE,
            scan_points=_times(fast_drive, per_period=4),
            single_mode=True,
            noise_enabled=True,
            shots_per_point=2,
            atoms_per_shot=500,
            seed=9,
        )
        serial = run_scenario(scenario)
        parallel = run_scenario(scenario.replace(jobs=2))
        assert serial.frame.equals(parallel.frame)
        assert serial.metadata == parallel.metadata
        other_seed = run_scenario(scenario.replace(seed=10))
        assert not np.array_equal(serial.frame[col_p_e_mean], other_seed.frame[col_p_e_mean])


def test_single_mode_bins(fast_drive):
    scenario = Scenario(drive=fast_drive, scan_points=(0.0,), single_mode=True)
    (bin_,) = scenario_bins(scenario)
    assert bin_.weight == 1.0
    assert bin_.coupling == pytest.approx(120.0 * math.exp(-0.5 * (0.25 ** 2 + 0.022 ** 2)))


@pytest.mark.slow
def test_thermal_ensemble_dephases_rabi_oscillation(rabi_drive):
    times = _times(rabi_drive, periods=4, per_period=80)
    single = run_scenario(Scenario(drive=rabi_drive, scan_points=times, single_mode=True)).p_e_mean
    thermal = run_scenario(Scenario(drive=rabi_drive, scan_points=times)).p_e_mean
    late = slice(len(times) * 3 // 4, None)
    single_swing = single[late].max() - single[late].min()
    thermal_swing = thermal[late].max() - thermal[late].min()
    assert thermal_swing < single_swing
