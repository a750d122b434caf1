import pytest

from clients.experiment_client import run_scenario
from models.errors import UnknownPreset
from registries import preset_registries, propagator_registries
from registries.standards.model_standards import basis_both, basis_diabatic


def test_all_presets_registered():
    assert preset_registries.list_presets() == [
        "fast-constructive",
        "fast-destructive",
        "slow-constructive",
        "slow-destructive",
        "slow-destructive-400",
        "rabi-320",
        "rabi-400",
    ]


@pytest.mark.parametrize("name, coupling, amplitude, mod_freq_hz", [
    ("fast-constructive", 120.0, 13.3, 200.0),
    ("fast-destructive", 120.0, 11.55, 200.0),
    ("slow-constructive", 320.0, 22.2, 62.5),
    ("slow-destructive", 320.0, 20.6, 62.5),
    ("slow-destructive-400", 400.0, 21.4, 62.5),
    ("rabi-320", 320.0, 0.0, 62.5),
    ("rabi-400", 400.0, 0.0, 62.5),
])
def test_preset_drive_values(name, coupling, amplitude, mod_freq_hz):
    scenario = preset_registries.preset(name)
    assert scenario.name == name
    assert scenario.drive.g_bare == coupling
    assert scenario.drive.amplitude == amplitude
    assert scenario.drive.mod_freq_hz == pytest.approx(mod_freq_hz)
    assert scenario.drive.static_detuning == 0.0


def test_fast_presets_cover_six_periods():
    scenario = preset_registries.preset("fast-constructive")
    assert len(scenario.scan_points) == 6 * 40 + 1
    assert scenario.scan_points[-1] == pytest.approx(6 / 200.0)
    assert scenario.basis_out == basis_diabatic
    assert scenario.single_mode


def test_slow_presets_report_both_bases():
    assert preset_registries.preset("slow-destructive").basis_out == basis_both


def test_rabi_presets_use_thermal_ensemble():
    scenario = preset_registries.preset("rabi-320")
    assert not scenario.single_mode
    assert not scenario.drive.is_driven


def test_unknown_preset():
    with pytest.raises(UnknownPreset):
        preset_registries.preset("fast-constructiv")


def test_detection_times_grid():
    times = preset_registries.detection_times(62.5, 4, 40)
    assert len(times) == 161
    assert times[0] == 0.0
    assert times[-1] == pytest.approx(0.064)


def test_registered_propagators():
    assert propagator_registries.trace_propagator_class().get_propagator_name() == "midpoint_exponential"
    assert propagator_registries.impulse_propagator.get_propagator_name() == "transfer_matrix"


def test_fast_destructive_preset_suppresses_transfer():
    constructive = run_scenario(preset_registries.preset("fast-constructive")).p_e_mean
    destructive = run_scenario(preset_registries.preset("fast-destructive")).p_e_mean
    # 11.55 sits about 0.14 below the impulse-model minimum, which caps the ratio near 3.5
    assert constructive.max() / destructive.max() >= 3
