import math

import pytest

from solnoise.config import ConfigError, example_config, load_config, resolve
from solnoise.units import FIG2_LOSS_GAMMA


def write(tmp_path, text):
    path = tmp_path / "run.toml"
    path.write_text(text)
    return str(path)


def test_example_config_parses(tmp_path):
    rc = load_config(write(tmp_path, example_config()))
    assert rc.sim.soliton_order == 1.0
    assert rc.sim.n_bar == 1e8
    assert rc.stepper.scheme == "semi-implicit-midpoint"
    assert rc.planes_xi == [1.0, 2.0, 3.0, 4.0]


def test_defaults_from_empty_config(tmp_path):
    rc = load_config(write(tmp_path, ""))
    assert rc.sim.n_points == 512
    assert rc.sim.zeta_max == pytest.approx(2 * math.pi)
    assert rc.planes_xi == [4.0]
    assert rc.trajectories == 1000


def test_overrides(tmp_path):
    rc = load_config(
        write(tmp_path, "[model]\nsoliton_order = 0.7\n"),
        overrides=["model.soliton_order=1.2", "run.seed=99", "model.noise=false"],
    )
    assert rc.sim.soliton_order == 1.2
    assert rc.sim.seed == 99
    assert rc.sim.noise is False


def test_field_precise_errors(tmp_path):
    with pytest.raises(ConfigError, match=r"\[model\]"):
        load_config(write(tmp_path, "[model]\nsoliton_order = -2.0\n"))
    with pytest.raises(ConfigError, match="unknown key"):
        load_config(write(tmp_path, "[model]\nsolton_order = 1.0\n"))
    with pytest.raises(ConfigError, match="unknown config section"):
        load_config(write(tmp_path, "[modle]\nx = 1\n"))
    with pytest.raises(ConfigError, match="not found"):
        load_config(str(tmp_path / "missing.toml"))
    with pytest.raises(ConfigError, match="parse error"):
        load_config(write(tmp_path, "model = [unclosed\n"))


def test_gamma_presets_and_alternatives(tmp_path):
    rc = load_config(write(tmp_path, '[model]\ngamma = "fig2-loss"\n'))
    assert rc.sim.gamma == pytest.approx(FIG2_LOSS_GAMMA)

    rc2 = load_config(write(tmp_path, "[model]\nloss_db_per_period = 0.0236\n"))
    assert rc2.sim.gamma == pytest.approx(FIG2_LOSS_GAMMA)

    rc3 = load_config(
        write(tmp_path, "[model]\nloss_db_per_km = 0.1\n[units]\nt0_s = 1e-12\nk2_s2_per_m = -1e-26\n")
    )
    # gamma = ln10/20 * dB/km * length_scale_km
    expected = math.log(10) / 20 * 0.1 * (1e-24 / 1e-26 / 1000)
    assert rc3.sim.gamma == pytest.approx(expected, rel=1e-12)

    with pytest.raises(ConfigError, match="more than once"):
        load_config(
            write(tmp_path, "[model]\ngamma = 0.1\nloss_db_per_km = 0.2\n")
        )
    with pytest.raises(ConfigError, match="preset"):
        load_config(write(tmp_path, '[model]\ngamma = "mystery"\n'))


def test_raman_section(tmp_path):
    rc = load_config(
        write(
            tmp_path,
            "[raman]\nenabled = true\ntemperature = 150.0\nraman_fraction = 0.2\n"
            "[units]\nt0_s = 2e-12\nk2_s2_per_m = -1e-26\n",
        )
    )
    assert rc.sim.raman is not None
    assert rc.sim.raman.temperature == 150.0
    assert rc.sim.raman.raman_fraction == 0.2
    assert rc.sim.raman.pulse_width_s == 2e-12


def test_run_section_validation(tmp_path):
    with pytest.raises(ConfigError, match="planes"):
        load_config(write(tmp_path, "[run]\nplanes = [9.0]\nxi_max = 4.0\n"))
    with pytest.raises(ConfigError, match="cutoffs"):
        load_config(write(tmp_path, "[run]\ncutoffs = [-0.5]\n"))
    with pytest.raises(ConfigError, match="trajectories"):
        load_config(write(tmp_path, "[run]\ntrajectories = 0\n"))


def test_override_parsing_errors():
    with pytest.raises(ConfigError, match="section.key=value"):
        resolve({}, ["model.noise"])
    with pytest.raises(ConfigError, match="must be section.key"):
        resolve({}, ["noise=false"])
    with pytest.raises(ConfigError, match="unknown config section"):
        resolve({}, ["nosuch.key=1"])


def test_override_coercion(tmp_path):
    rc = load_config(
        write(tmp_path, ""),
        overrides=[
            "run.planes=[0.5, 1.0]",
            "run.cutoffs=[0.1]",
            "grid.n_points=256",
            "model.dispersion=normal",
        ],
    )
    assert rc.planes_xi == [0.5, 1.0]
    assert rc.sim.n_points == 256
    assert rc.sim.dispersion == "normal"
