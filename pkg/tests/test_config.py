import pytest

from bumpwalk.config import ConfigError, load_config, scenario_defaults
from bumpwalk.gait import CALIBRATED_GAINS, HARDWARE_GAINS, ZMP_COM_SCALES


def write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_minimal_config_gets_defaults(tmp_path):
    sc = load_config(write(tmp_path, 'scenario = "flat_1kmh"\n'))
    assert sc.id == "flat_1kmh"
    assert sc.gait.step_length == 0.25 and sc.gait.step_time == 0.9
    assert sc.control.rate_hz == 200.0
    assert sc.control.force == HARDWARE_GAINS["force"]
    assert abs(sc.gait.omega ** 2 * sc.gait.com_height - sc.gait.gravity) < 1e-12


def test_omega_follows_overridden_height(tmp_path):
    sc = load_config(write(tmp_path, 'scenario = "flat_1kmh"\n[gait]\ncom_height = 0.5\n'))
    assert sc.gait.omega == pytest.approx((9.81 / 0.5) ** 0.5, rel=1e-15)


def test_bad_double_support_fraction_names_field(tmp_path):
    path = write(tmp_path, 'scenario = "flat_1kmh"\n[gait]\ndouble_support_fraction = 1.2\n')
    with pytest.raises(ConfigError, match="double_support_fraction"):
        load_config(path)


def test_hardware_gains_echoed_in_header(tmp_path):
    sc = load_config(write(tmp_path, 'scenario = "flat_1kmh"\n[control]\ngain_set = "hardware"\n'))
    h = sc.header()
    assert (h["force_kp"], h["force_kr"]) == (5e-5, 1.0)
    assert (h["bump_kp"], h["bump_kr"]) == (5e-3, 1.0)
    assert (h["orientation_kp"], h["orientation_kr"]) == (1.58e-2, 6.0)


def test_parse_error_reports_line(tmp_path):
    path = write(tmp_path, 'scenario = "flat_1kmh"\n[gait\nn_steps = 3\n')
    with pytest.raises(ConfigError, match="line 2"):
        load_config(path)


def test_unknown_keys_rejected(tmp_path):
    with pytest.raises(ConfigError, match="stride"):
        load_config(write(tmp_path, 'scenario = "flat_1kmh"\n[gait]\nstride = 1\n'))


def test_unknown_scenario_and_missing_id(tmp_path):
    with pytest.raises(ConfigError, match="unknown scenario"):
        load_config(write(tmp_path, 'scenario = "moonwalk"\n'))
    with pytest.raises(ConfigError, match="scenario"):
        load_config(write(tmp_path, "seed = 3\n"))


def test_missing_file_is_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.toml")


def test_gain_sets_and_zmp_scales(tmp_path):
    sc = load_config(write(tmp_path, 'scenario = "flat_1kmh"\n[control]\ngain_set = "calibrated"\n'))
    assert sc.control.bump == CALIBRATED_GAINS["bump"]
    assert sc.control.orientation == CALIBRATED_GAINS["orientation"]
    w = sc.gait.omega
    zmp_s, com_s = ZMP_COM_SCALES["calibrated"]
    assert sc.zmp_com_gains.k_zmp == pytest.approx(zmp_s * w)
    assert sc.zmp_com_gains.k_com == pytest.approx(com_s * w)
    assert sc.zmp_com_gains.k_zmp > w > sc.zmp_com_gains.k_com


def test_individual_gain_override(tmp_path):
    text = 'scenario = "flat_1kmh"\n[control.bump]\nkp = 1.5\ns_on = 0.6\n[control.zmp_com]\nk_com = 0.1\n'
    sc = load_config(write(tmp_path, text))
    assert sc.control.bump.kp == 1.5 and sc.control.bump.kr == 1.0
    assert sc.control.window.s_on == 0.6
    assert sc.zmp_com_gains.k_com == 0.1


def test_layer_flags_and_policy(tmp_path):
    text = ('scenario = "step_in_place"\n[control]\ndu_policy = "reset"\n'
            '[control.layers]\nbump = false\n')
    sc = load_config(write(tmp_path, text))
    assert not sc.layers.bump and sc.layers.force
    assert sc.control.du_policy == "reset"
    with pytest.raises(ConfigError, match="du_policy"):
        load_config(write(tmp_path, 'scenario = "flat_1kmh"\n[control]\ndu_policy = "x"\n', "b.toml"))


def test_terrain_file_relative_to_config(tmp_path):
    (tmp_path / "t").mkdir()
    (tmp_path / "t" / "ramp.toml").write_text(
        "max_height = 0.02\n[[patch]]\nx_start = 0.5\nx_end = 0.7\npitch_deg = 10.0\n"
    )
    sc = load_config(write(tmp_path, 'scenario = "flat_1kmh"\n[terrain]\nfile = "t/ramp.toml"\n'))
    assert len(sc.terrain.patches) == 1
    assert sc.terrain.max_height == 0.02


def test_overlapping_patches_rejected(tmp_path):
    text = ('scenario = "flat_1kmh"\n[[terrain.patch]]\nx_start = 0.1\nx_end = 0.5\n'
            '[[terrain.patch]]\nx_start = 0.4\nx_end = 0.6\n')
    with pytest.raises(ConfigError, match="overlap"):
        load_config(write(tmp_path, text))


def test_shipped_configs_load(configs_dir):
    ids = set()
    for path in sorted(configs_dir.glob("*.toml")):
        ids.add(load_config(path).id)
    assert ids == {"flat_1kmh", "inclined_obstacles", "step_in_place"}


def test_obstacle_defaults_match_course():
    sc = scenario_defaults("inclined_obstacles")
    slopes = sorted(p.pitch_deg for p in sc.terrain.patches)
    assert slopes == [7.0, 12.0]
    assert sc.terrain.max_height == 0.025
    assert sc.gait.n_steps == 8
