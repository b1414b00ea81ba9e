import os
import math
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np
import yaml

from ..core.errors import ConfigurationError
from ..core.model import DuplexMix, NetworkConfig, SelfInterferenceModel, SuccessMode
from ..simulation.network import SimConfig
from .units import PERFECT, beta_from_cancellation_db, db_to_linear

logger = logging.getLogger('loader')

PROJECT_ROOT = Path(__file__).resolve().parents[2]
BASE_CONFIG = PROJECT_ROOT / "configs" / "base.yaml"
SWEEP_VARIABLES = ("theta_db", "lambda", "R", "alpha", "beta_db", "p1", "p2")
SPACINGS = ("linear", "log")
DEFAULT_PRESET = "wifi_2g4"


def _fail(message: str) -> None:
    logger.error(message)
    raise ConfigurationError(message)


def read_yaml(path: str | os.PathLike) -> dict:
    """
    Read a YAML mapping, raising clear exceptions for missing or malformed files.

    Raises
    ------
    FileNotFoundError
        If the file does not exist.
    ConfigurationError
        If the file is not valid YAML or its top level is not a mapping.
    """
    path = Path(path)
    if not path.exists():
        logger.error(f"File not found: {path}")
        raise FileNotFoundError(f"File not found: {path}")
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        _fail(f"{path}: invalid YAML: {e}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        _fail(f"{path}: top level must be a mapping, got {type(data).__name__}")
    return data


def apply_overrides(raw: dict, overrides: Iterable[str]) -> dict:
    """
    Apply `section.key=value` overrides; values are parsed as YAML scalars.
    """
    for item in overrides:
        if "=" not in item:
            _fail(f"override {item!r} is not of the form section.key=value")
        dotted, value = item.split("=", 1)
        keys = [k for k in dotted.strip().split(".") if k]
        if not keys:
            _fail(f"override {item!r} has an empty key")
        node = raw
        for k in keys[:-1]:
            child = node.get(k)
            if child is None:
                child = node[k] = {}
            elif not isinstance(child, dict):
                _fail(f"override {item!r}: {k} is not a section")
            node = child
        node[keys[-1]] = yaml.safe_load(value)
        logger.debug(f"override {dotted} = {node[keys[-1]]!r}")
    return raw


def _number(section: dict, name: str, path: str, default: Any = None, kind=float):
    value = section.get(name, default)
    if value is None:
        _fail(f"missing field {path}.{name}")
    try:
        if kind is int and not isinstance(value, int):
            # YAML reads 1e5 as a string
            as_float = float(value)
            if not as_float.is_integer():
                raise ValueError(value)
            return int(as_float)
        return kind(value)
    except (TypeError, ValueError):
        _fail(f"field {path}.{name} must be a {kind.__name__}, got {value!r}")


def _tolerance(section: dict, name: str, path: str, default: float) -> float:
    value = _number(section, name, path, default)
    if not (math.isfinite(value) and value > 0):
        _fail(f"field {path}.{name} must be a finite number > 0, got {value!r}")
    return value


def parse_beta_db(value: Any, path: str = "self_interference.beta_db") -> tuple[float | str, float]:
    """
    Read a cancellation depth: a number of dB >= 0 or 'perfect'.

    Returns
    -------
    tuple[float | str, float]
        (depth as given, float or 'perfect'; beta in [0, 1]).

    Raises
    ------
    ConfigurationError
        Naming `path` when the value is missing, not a number, or gives beta > 1.
    """
    if isinstance(value, str) and value.strip().lower() == PERFECT:
        return PERFECT, 0.0
    if value is None or isinstance(value, bool):
        _fail(f"field {path} must be a number of dB or 'perfect', got {value!r}")
    try:
        depth = float(value)
    except (TypeError, ValueError):
        _fail(f"field {path} must be a number of dB or 'perfect', got {value!r}")
    if not math.isfinite(depth):
        _fail(f"field {path} must be finite, got {value!r}")
    beta = beta_from_cancellation_db(depth)
    if not (0.0 <= beta <= 1.0):
        _fail(f"field {path}={value} gives beta={beta:.6g} outside [0, 1]")
    return depth, beta


@dataclass(frozen=True)
class Settings:
    """
    Defaults from configs/base.yaml.
    """
    rel_tol: float = 1e-9
    trials: int = 100_000
    seed: int = 2015
    truncation_epsilon: float = 1e-3
    confidence_level: float = 0.99
    miss_budget_quantile: float = 0.99
    low_trial_threshold: int = 100
    out_dir: str = "results/figures"
    theta_points: int = 61
    tg_theta_points: int = 101
    distance_points: int = 61
    workers: Optional[int] = None
    presets: dict = field(default_factory=lambda: {DEFAULT_PRESET: -34.0})
    logger: dict = field(default_factory=dict)

    def preset_K(self, name: str) -> float:
        if name not in self.presets:
            _fail(f"unknown K preset {name!r}; known presets: {sorted(self.presets)}")
        return db_to_linear(self.presets[name])


def load_settings(path: str | os.PathLike = BASE_CONFIG) -> Settings:
    """
    Load configs/base.yaml into Settings; absent keys keep their defaults.
    """
    data = read_yaml(path)
    quad = data.get("quadrature") or {}
    sim = data.get("simulation") or {}
    val = data.get("validation") or {}
    figs = data.get("figures") or {}
    par = data.get("parallel") or {}
    d = Settings()
    settings = Settings(
        rel_tol=_tolerance(quad, "rel_tol", "quadrature", d.rel_tol),
        trials=_number(sim, "trials", "simulation", d.trials, int),
        seed=_number(sim, "seed", "simulation", d.seed, int),
        truncation_epsilon=_number(sim, "truncation_epsilon", "simulation", d.truncation_epsilon),
        confidence_level=_number(sim, "confidence_level", "simulation", d.confidence_level),
        miss_budget_quantile=_number(val, "miss_budget_quantile", "validation", d.miss_budget_quantile),
        low_trial_threshold=_number(val, "low_trial_threshold", "validation", d.low_trial_threshold, int),
        out_dir=str(figs.get("out_dir", d.out_dir)),
        theta_points=_number(figs, "theta_points", "figures", d.theta_points, int),
        tg_theta_points=_number(figs, "tg_theta_points", "figures", d.tg_theta_points, int),
        distance_points=_number(figs, "distance_points", "figures", d.distance_points, int),
        workers=par.get("workers"),
        presets={str(k): float(v) for k, v in (data.get("presets") or d.presets).items()},
        logger=dict(data.get("logger") or {}),
    )
    logger.debug(f"settings loaded from {path}")
    return settings


@dataclass(frozen=True)
class SweepSpec:
    """
    One swept variable over a linear or log-spaced grid.
    """
    variable: str
    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            _fail(f"sweep.variable must be one of {list(SWEEP_VARIABLES)}, got {self.variable!r}")
        if self.count < 2:
            _fail(f"sweep.count must be >= 2, got {self.count}")
        if self.spacing not in SPACINGS:
            _fail(f"sweep.spacing must be one of {list(SPACINGS)}, got {self.spacing!r}")
        if self.spacing == "log" and not (self.start > 0 and self.stop > 0):
            _fail(f"sweep.spacing=log needs positive endpoints, got start={self.start} stop={self.stop}")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class ExperimentSpec:
    """
    A parsed experiment: the base point, the sweep, the optional simulation block and the output path.

    Attributes:
    name (str): Experiment name, used for default output names.
    theta_db (float): SIR threshold of the base point in dB.
    network (NetworkConfig): Base point with theta in linear scale.
    mix (DuplexMix): Link-state probabilities.
    beta_db (float | str): Cancellation depth in dB, or "perfect".
    si (SelfInterferenceModel): Residual self-interference of the base point.
    sweep (SweepSpec): Swept variable and grid.
    sim (SimConfig | None): Monte Carlo settings; None means analytic only.
    mc_mode (SuccessMode): Probability estimated by the simulation block.
    output (Path): CSV path.
    rel_tol (float): Quadrature tolerance.
    corrupt_f (float): Debug factor applied to F in the analytic probabilities.
    miss_budget_quantile (float), low_trial_threshold (int): Validation settings.
    """
    name: str
    theta_db: float
    network: NetworkConfig
    mix: DuplexMix
    beta_db: float | str
    si: SelfInterferenceModel
    sweep: SweepSpec
    sim: Optional[SimConfig]
    mc_mode: SuccessMode
    output: Path
    rel_tol: float = 1e-9
    corrupt_f: float = 1.0
    miss_budget_quantile: float = 0.99
    low_trial_threshold: int = 100

    def point(self, value: float) -> tuple[NetworkConfig, DuplexMix, SelfInterferenceModel, float]:
        """
        Model objects at one grid value of the swept variable.

        Returns (cfg, mix, si, theta_db); theta is converted from dB here and nowhere else.
        """
        cfg, mix, si, theta_db = self.network, self.mix, self.si, self.theta_db
        var = self.sweep.variable
        try:
            if var == "theta_db":
                theta_db = float(value)
                cfg = replace(cfg, theta=db_to_linear(value))
            elif var == "lambda":
                cfg = replace(cfg, lam=float(value))
            elif var == "R":
                cfg = replace(cfg, R=float(value))
            elif var == "alpha":
                cfg = replace(cfg, alpha=float(value))
            elif var == "beta_db":
                si = si.with_beta(beta_from_cancellation_db(value))
            elif var in ("p1", "p2"):
                p1 = float(value) if var == "p1" else mix.p1
                p2 = float(value) if var == "p2" else mix.p2
                p0 = 1.0 - p1 - p2
                if p0 < -1e-12:
                    _fail(f"sweep.{var}={value} leaves p0 = {p0:.6g} < 0")
                mix = DuplexMix(max(p0, 0.0), p1, p2)
        except ConfigurationError as e:
            raise ConfigurationError(f"sweep.{var}={value}: {e}") from e
        return cfg, mix, si, theta_db


def _parse_si(section: dict, settings: Settings) -> tuple[float | str, SelfInterferenceModel]:
    beta_db, beta = parse_beta_db(section.get("beta_db", PERFECT))

    if "K_db" in section:
        K = db_to_linear(_number(section, "K_db", "self_interference"))
    elif "antenna" in section:
        ant = section["antenna"] or {}
        path = "self_interference.antenna"
        return beta_db, SelfInterferenceModel.from_antenna(
            beta,
            g_tx=db_to_linear(_number(ant, "g_tx_dbi", path)),
            g_rx=db_to_linear(_number(ant, "g_rx_dbi", path)),
            f_c=_number(ant, "f_c", path),
        )
    else:
        K = settings.preset_K(str(section.get("K_preset", DEFAULT_PRESET)))
    return beta_db, SelfInterferenceModel(beta=beta, K=K)


def _parse_sim(section: Optional[dict], settings: Settings) -> tuple[Optional[SimConfig], SuccessMode]:
    if not section:
        return None, SuccessMode.UNCONDITIONAL
    mode_name = str(section.get("mode", SuccessMode.UNCONDITIONAL.value)).upper()
    try:
        mode = SuccessMode(mode_name)
    except ValueError:
        _fail(f"field simulation.mode must be one of {[m.value for m in SuccessMode]}, got {mode_name!r}")
    sim = SimConfig(
        trials=_number(section, "trials", "simulation", settings.trials, int),
        seed=_number(section, "seed", "simulation", settings.seed, int),
        truncation_epsilon=_number(section, "truncation_epsilon", "simulation", settings.truncation_epsilon),
        confidence_level=_number(section, "confidence_level", "simulation", settings.confidence_level),
        include_mark_interference=bool(section.get("include_mark_interference", True)),
    )
    return sim, mode


def parse_experiment(raw: dict, settings: Settings, source: str = "<spec>") -> ExperimentSpec:
    """
    Build an ExperimentSpec from a raw mapping.

    Raises
    ------
    ConfigurationError
        Naming the offending field.
    """
    for section in ("network", "mix", "sweep"):
        if not isinstance(raw.get(section), dict):
            _fail(f"{source}: missing section {section!r}")
    net, mix_raw, sweep_raw = raw["network"], raw["mix"], raw["sweep"]

    theta_db = _number(net, "theta_db", "network", 0.0)
    try:
        network = NetworkConfig(
            lam=_number(net, "lambda", "network"),
            theta=db_to_linear(theta_db),
            R=_number(net, "R", "network", 1.0),
            alpha=_number(net, "alpha", "network", 4.0),
        )
    except ConfigurationError as e:
        raise ConfigurationError(f"{source}: network: {e}") from e

    p1 = _number(mix_raw, "p1", "mix")
    p2 = _number(mix_raw, "p2", "mix")
    p0 = _number(mix_raw, "p0", "mix", max(0.0, 1.0 - p1 - p2))
    try:
        mix = DuplexMix(p0, p1, p2)
    except ConfigurationError as e:
        raise ConfigurationError(f"{source}: mix: {e}") from e

    beta_db, si = _parse_si(raw.get("self_interference") or {}, settings)

    variable = sweep_raw.get("variable")
    if variable is None:
        _fail(f"{source}: missing field sweep.variable")
    sweep = SweepSpec(
        variable=str(variable),
        start=_number(sweep_raw, "start", "sweep"),
        stop=_number(sweep_raw, "stop", "sweep"),
        count=_number(sweep_raw, "count", "sweep", kind=int),
        spacing=str(sweep_raw.get("spacing", "linear")),
    )

    sim, mc_mode = _parse_sim(raw.get("simulation"), settings)
    val = raw.get("validation") or {}
    name = str(raw.get("name", Path(source).stem))
    output = Path(raw.get("output") or Path("results") / f"{name}.csv")

    spec = ExperimentSpec(
        name=name,
        theta_db=theta_db,
        network=network,
        mix=mix,
        beta_db=beta_db,
        si=si,
        sweep=sweep,
        sim=sim,
        mc_mode=mc_mode,
        output=output,
        rel_tol=_tolerance(raw.get("quadrature") or {}, "rel_tol", "quadrature", settings.rel_tol),
        corrupt_f=_number(val, "corrupt_f", "validation", 1.0),
        miss_budget_quantile=_number(val, "miss_budget_quantile", "validation", settings.miss_budget_quantile),
        low_trial_threshold=_number(val, "low_trial_threshold", "validation", settings.low_trial_threshold, int),
    )
    # every grid point must be a valid configuration
    for value in sweep.values():
        spec.point(float(value))
    logger.info(f"experiment {name!r}: sweep {sweep.variable} x {sweep.count}, "
                f"simulation {'on' if sim else 'off'}")
    return spec


def load_experiment(path: str | os.PathLike, settings: Optional[Settings] = None,
                    overrides: Iterable[str] = ()) -> ExperimentSpec:
    """
    Load an experiment YAML file, apply `section.key=value` overrides and validate it.

    Raises
    ------
    FileNotFoundError
        If the spec file does not exist.
    ConfigurationError
        If any field is missing or invalid; the message names the field.
    """
    settings = settings or load_settings()
    raw = apply_overrides(read_yaml(path), overrides)
    return parse_experiment(raw, settings, source=str(path))
