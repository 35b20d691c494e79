import pytest

from twinwave.config import build_config, default_config, default_toml, parse_config
from twinwave.errors import ConfigError


class TestParse:
    def test_minimal_file_gets_defaults(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text("[pump]\npower_mw = 35.0\n")
        cfg = parse_config(path)
        assert cfg.pump.power_mw == 35.0
        assert cfg.pump.crystal_length_mm == 5.0  # default
        assert cfg.shots == 2000
        echo = dict(cfg.echo)
        assert echo["pump.power_mw"] == 35.0
        assert echo["run.shots"] == 2000

    def test_unknown_section_named(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text("[pumpp]\npower = 1.0\n")
        with pytest.raises(ConfigError, match="pumpp"):
            parse_config(path)

    def test_unknown_key_named(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text("[pump]\npowerr_mw = 1.0\n")
        with pytest.raises(ConfigError, match="pump.powerr_mw"):
            parse_config(path)

    def test_negative_power_rejected(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text("[pump]\npower_mw = -5.0\n")
        with pytest.raises(ConfigError):
            parse_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            parse_config(tmp_path / "nope.toml")

    def test_parse_error_reported(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text("[pump\npower_mw = 1")
        with pytest.raises(ConfigError, match="parse error"):
            parse_config(path)


class TestDefaults:
    def test_default_toml_roundtrip(self, tmp_path):
        path = tmp_path / "defaults.toml"
        path.write_text(default_toml())
        assert parse_config(path).echo == default_config().echo

    def test_default_grid_shape(self):
        cfg = default_config()
        assert cfg.modes.shape == (13, 12, 12)
        assert (cfg.geometry.n_radial, cfg.geometry.n_wavelength) == (62, 124)

    def test_override_syntax(self):
        cfg = default_config(**{"pump.power_mw": 12.0, "run.shots": 5})
        assert cfg.pump.power_mw == 12.0 and cfg.shots == 5
        with pytest.raises(ConfigError):
            default_config(**{"power_mw": 12.0})

    def test_build_config_rejects_non_table(self):
        with pytest.raises(ConfigError):
            build_config({"pump": 5})
