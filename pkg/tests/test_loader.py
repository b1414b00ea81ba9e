import math

import pytest
import yaml

from src.cli.loader import (
    BASE_CONFIG,
    PROJECT_ROOT,
    Settings,
    apply_overrides,
    load_experiment,
    load_settings,
    parse_beta_db,
    parse_experiment,
    read_yaml,
)
from src.core.errors import ConfigurationError
from src.core.model import SPEED_OF_LIGHT, SuccessMode

SPEC = {
    "name": "unit",
    "network": {"lambda": 0.1, "theta_db": 0.0, "R": 1.0, "alpha": 4.0},
    "mix": {"p1": 0.3, "p2": 0.5},
    "self_interference": {"beta_db": 80.0, "K_db": -34.0},
    "sweep": {"variable": "theta_db", "start": -10.0, "stop": 20.0, "count": 4},
}


def _raw(**sections):
    raw = {k: dict(v) if isinstance(v, dict) else v for k, v in SPEC.items()}
    raw.update(sections)
    return raw


def test_base_config_loads():
    '''
    configs/base.yaml parses and carries the wifi_2g4 preset.
    '''
    settings = load_settings(BASE_CONFIG)
    assert settings.rel_tol == pytest.approx(1e-9)
    assert settings.presets["wifi_2g4"] == pytest.approx(-34.0)
    assert settings.preset_K("wifi_2g4") == pytest.approx(10 ** -3.4)
    assert "cli_level" in settings.logger


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_yaml(tmp_path / "absent.yaml")


def test_malformed_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("network: [1, 2\n")
    with pytest.raises(ConfigurationError):
        read_yaml(path)


def test_top_level_must_be_mapping(tmp_path):
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigurationError):
        read_yaml(path)


def test_overrides_parse_scalars():
    raw = apply_overrides({"simulation": {"trials": 10}}, ["simulation.trials=2000", "simulation.mode=FD",
                                                           "validation.corrupt_f=1.1"])
    assert raw["simulation"] == {"trials": 2000, "mode": "FD"}
    assert raw["validation"]["corrupt_f"] == 1.1


def test_override_without_equals():
    with pytest.raises(ConfigurationError):
        apply_overrides({}, ["simulation.trials"])


def test_parse_minimal_spec():
    spec = parse_experiment(_raw(), Settings())
    assert spec.sim is None
    assert spec.mc_mode is SuccessMode.UNCONDITIONAL
    assert spec.mix.p0 == pytest.approx(0.2)
    assert spec.si.beta == pytest.approx(1e-8)
    assert list(spec.sweep.values()) == [-10.0, 0.0, 10.0, 20.0]
    assert spec.output.name == "unit.csv"


def test_point_converts_threshold_once():
    spec = parse_experiment(_raw(), Settings())
    cfg, mix, si, theta_db = spec.point(10.0)
    assert theta_db == 10.0
    assert cfg.theta == pytest.approx(10.0)
    assert mix == spec.mix and si == spec.si


def test_perfect_cancellation_and_preset():
    spec = parse_experiment(_raw(self_interference={"beta_db": "perfect"}), Settings())
    assert spec.si.beta == 0.0
    assert spec.si.K == pytest.approx(10 ** -3.4)


def test_antenna_constant_from_gains():
    raw = _raw(self_interference={"beta_db": 100.0, "antenna": {"g_tx_dbi": 0.0, "g_rx_dbi": 0.0, "f_c": 2.4e9}})
    spec = parse_experiment(raw, Settings())
    assert spec.si.K == pytest.approx((SPEED_OF_LIGHT / (4 * math.pi * 2.4e9)) ** 2, rel=1e-12)


def test_simulation_block():
    raw = _raw(simulation={"mode": "hd", "trials": "1e4", "seed": 7})
    spec = parse_experiment(raw, Settings())
    assert spec.mc_mode is SuccessMode.HD
    assert spec.sim.trials == 10_000
    assert spec.sim.seed == 7


@pytest.mark.parametrize("section,value,field", [
    ("network", {"theta_db": 0.0, "R": 1.0}, "network.lambda"),
    ("network", {"lambda": 0.1, "alpha": 2.0}, "alpha"),
    ("mix", {"p1": 0.7, "p2": 0.7}, "mix"),
    ("sweep", {"variable": "gamma", "start": 0, "stop": 1, "count": 3}, "sweep.variable"),
    ("sweep", {"variable": "R", "start": 1, "stop": 2, "count": 1}, "sweep.count"),
    ("sweep", {"variable": "R", "start": 0, "stop": 2, "count": 3, "spacing": "log"}, "sweep.spacing"),
    ("simulation", {"mode": "both", "trials": 10}, "simulation.mode"),
    ("simulation", {"trials": 0}, "trials"),
    ("self_interference", {"beta_db": -3.0}, "beta_db"),
    ("self_interference", {"beta_db": 80.0, "K_preset": "lte"}, "preset"),
    ("self_interference", {"beta_db": None}, "beta_db"),
    ("self_interference", {"beta_db": "deep"}, "beta_db"),
    ("quadrature", {"rel_tol": 0.0}, "quadrature.rel_tol"),
])
def test_invalid_field_named(section, value, field):
    with pytest.raises(ConfigurationError, match=field):
        parse_experiment(_raw(**{section: value}), Settings())


def test_sweep_leaving_negative_p0():
    raw = _raw(sweep={"variable": "p2", "start": 0.0, "stop": 0.9, "count": 4})
    with pytest.raises(ConfigurationError, match="sweep.p2"):
        parse_experiment(raw, Settings())


def test_shipped_experiments_parse():
    '''
    Every experiment under configs/experiments is a valid spec.
    '''
    settings = load_settings(BASE_CONFIG)
    paths = sorted((PROJECT_ROOT / "configs" / "experiments").glob("*.yaml"))
    assert paths
    for path in paths:
        spec = load_experiment(path, settings)
        assert spec.sweep.count >= 2


def test_load_experiment_with_overrides(tmp_path):
    path = tmp_path / "spec.yaml"
    path.write_text(yaml.safe_dump(_raw(simulation={"trials": 100, "seed": 1})))
    spec = load_experiment(path, Settings(), ["simulation.seed=99", f"output={tmp_path / 'out.csv'}"])
    assert spec.sim.seed == 99
    assert spec.output == tmp_path / "out.csv"


def test_base_config_rejects_non_positive_tolerance(tmp_path):
    path = tmp_path / "base.yaml"
    path.write_text("quadrature:\n  rel_tol: -1.0e-9\n")
    with pytest.raises(ConfigurationError, match="quadrature.rel_tol"):
        load_settings(path)


@pytest.mark.parametrize("value, expected", [("perfect", 0.0), (" Perfect ", 0.0), (30.0, 1e-3), ("30", 1e-3), (0, 1.0)])
def test_parse_beta_db(value, expected):
    assert parse_beta_db(value)[1] == pytest.approx(expected, rel=1e-12)
