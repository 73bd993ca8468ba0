import pytest

from scalewave.config import (PRESETS, ConfigError, ExperimentConfig, dump_config, dumps_config,
                              load_config, preset)
from scalewave.params import EnergyClass, LebesgueClass, NegSobolevClass


def test_defaults_validate():
    ExperimentConfig().validate()


def test_roundtrip(tmp_path):
    cfg = preset("neg-sobolev")
    path = tmp_path / "c.toml"
    dump_config(cfg, path)
    back = load_config(path)
    assert back.to_dict() == cfg.to_dict()
    assert "class = " in dumps_config(cfg)


@pytest.mark.parametrize("name", PRESETS)
def test_presets_build(name):
    cfg = preset(name)
    assert cfg.run.name == name
    cfg.grid_obj(reduced=True)
    cfg.initial_data_obj()
    cfg.tolerance_obj(2.0)
    cfg.check_fit_ready()


def test_unknown_preset():
    with pytest.raises(ConfigError, match="^preset"):
        preset("nope")


@pytest.mark.parametrize("doc,path", [
    ({"grid": {"rho_min": 2.0}}, "grid.rho_min"),
    ({"grid": {"n_log": 1.5}}, "grid.n_log"),
    ({"coefficients": {"mu1": "a"}}, "coefficients.mu1"),
    ({"data": {"class": "sobolev"}}, "data.class"),
    ({"data": {"bogus": 1}}, "data.bogus"),
    ({"nosuch": {}}, "nosuch"),
    ({"sweep": {"r": [1.0, 2.5]}}, "sweep.r[1]"),
    ({"run": {"include_dw": 1}}, "run.include_dw"),
    ({"run": {"method": "bessel"}, "coefficients": {"mu2": 1.0}}, "run.method"),
    ({"rates": {"fit_hi": 1e5}}, "rates.fit_hi"),
])
def test_errors_name_field(doc, path):
    with pytest.raises(ConfigError) as ei:
        ExperimentConfig.from_dict(doc)
    assert str(ei.value).startswith(path)


def test_overlay_on_base():
    cfg = ExperimentConfig.from_dict({"coefficients": {"mu2": 0.1}}, base=preset("dabbicco-wave"))
    assert cfg.coefficients.mu1 == 4.0 and cfg.coefficients.mu2 == 0.1


def test_bad_toml(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text("[grid\n")
    with pytest.raises(ConfigError, match="invalid TOML"):
        load_config(path)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.toml")


def test_class_objects():
    assert isinstance(ExperimentConfig().data_class_obj(), LebesgueClass)
    cfg = ExperimentConfig.from_dict({"data": {"class": "neg_sobolev", "s": 0.3}})
    assert cfg.data_class_obj() == NegSobolevClass(0.3)
    cfg = ExperimentConfig.from_dict({"data": {"class": "energy"}})
    assert isinstance(cfg.data_class_obj(), EnergyClass)


def test_check_fit_ready():
    cfg = ExperimentConfig()
    with pytest.raises(ConfigError, match="^scatter.T_max"):
        cfg.check_fit_ready()
    cfg = ExperimentConfig.from_dict({"scatter": {"T_max": 1e6}})
    with pytest.raises(ConfigError, match="^grid.rho_min"):
        cfg.check_fit_ready()
    ExperimentConfig.from_dict({"scatter": {"T_max": 1e6}, "grid": {"rho_min": 1e-6}}).check_fit_ready()
