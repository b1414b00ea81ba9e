import json

import pytest

from src.cli.loader import BASE_CONFIG, PROJECT_ROOT, Settings, load_experiment, load_settings, parse_experiment
from src.cli.validate import report_path, validate
from src.core.errors import ConfigurationError


def _spec(tmp_path, name="check", trials=2000, corrupt_f=1.0, simulation=True):
    raw = {
        "name": name,
        "network": {"lambda": 0.2, "theta_db": 0.0, "R": 1.0, "alpha": 4.0},
        "mix": {"p1": 0.5, "p2": 0.5},
        "self_interference": {"beta_db": "perfect"},
        "sweep": {"variable": "theta_db", "start": -5.0, "stop": 5.0, "count": 3},
        "validation": {"corrupt_f": corrupt_f},
        "output": str(tmp_path / f"{name}.csv"),
    }
    if simulation:
        raw["simulation"] = {"mode": "UNCONDITIONAL", "trials": trials, "seed": 2015, "confidence_level": 0.99}
    return parse_experiment(raw, Settings())


def test_validation_passes(tmp_path):
    spec = _spec(tmp_path)
    report = validate(spec, workers=1)
    assert report.passed
    assert report.miss_budget == 1
    assert len(report.points) == 3
    assert report.warnings == []
    saved = json.loads(report_path(spec).read_text())
    assert saved["passed"] is True
    assert (tmp_path / "check.csv").exists()


def test_corrupted_functional_fails(tmp_path):
    '''
    Doubling F drags the analytic curve well outside every interval.
    '''
    report = validate(_spec(tmp_path, corrupt_f=2.0), workers=1)
    assert not report.passed
    assert report.misses == 3
    assert any("negative control" in w for w in report.warnings)
    assert "FAIL" in report.summary()


def test_low_trial_count_warns(tmp_path):
    report = validate(_spec(tmp_path, trials=50), workers=1, write=False)
    assert any("low trial count" in w for w in report.warnings)


def test_needs_simulation_block(tmp_path):
    with pytest.raises(ConfigurationError):
        validate(_spec(tmp_path, simulation=False), workers=1)


def test_reports_byte_identical(tmp_path):
    '''
    Same spec and seed, different worker counts: identical CSV and report bytes.
    '''
    first, second = tmp_path / "a", tmp_path / "b"
    first.mkdir()
    second.mkdir()
    a = _spec(first, trials=600)
    b = _spec(second, trials=600)
    validate(a, workers=1)
    validate(b, workers=2)
    assert a.output.read_bytes() == b.output.read_bytes()
    assert report_path(a).read_bytes() == report_path(b).read_bytes()


@pytest.mark.slow
def test_shipped_fig1_validation(tmp_path):
    '''
    13 thresholds at 1e5 trials: at least 12 analytic values inside the 99% Wilson interval.
    '''
    settings = load_settings(BASE_CONFIG)
    spec = load_experiment(PROJECT_ROOT / "configs" / "experiments" / "fig1_validate.yaml", settings,
                           [f"output={tmp_path / 'fig1_validate.csv'}"])
    report = validate(spec)
    assert len(report.points) == 13
    assert sum(p["pass"] for p in report.points) >= 12
    assert report.passed
