import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .analytic import kappa, pair_F, ps_fd, ps_hd, spectral_H
from .errors import ConfigurationError
from .model import DuplexMix, NetworkConfig, SelfInterferenceModel
from .quadrature import DEFAULT_REL_TOL

logger = logging.getLogger('throughput')

# spectral efficiency is log(1 + theta) in nats; divide by NATS_PER_BIT for bits
NATS_PER_BIT = math.log(2.0)
BREAK_EVEN_TOL = 1e-9


def to_bits(nats: float) -> float:
    return nats / NATS_PER_BIT


class Regime(str, Enum):
    FD_ONLY = "FD_ONLY"
    HD_ONLY = "HD_ONLY"
    BREAK_EVEN = "BREAK_EVEN"


@dataclass(frozen=True)
class LinkDensities:
    """
    Densities of HD links (lambda1 = lambda p1) and FD links (lambda2 = lambda p2).
    """
    lambda1: float
    lambda2: float

    def __post_init__(self):
        for name, v in (("lambda1", self.lambda1), ("lambda2", self.lambda2)):
            if not (math.isfinite(v) and v >= 0):
                message = f"{name} must be finite and >= 0, got {v!r}"
                logger.error(message)
                raise ConfigurationError(message)

    @property
    def total(self) -> float:
        return self.lambda1 + self.lambda2

    @classmethod
    def from_mix(cls, lam: float, mix: DuplexMix) -> "LinkDensities":
        return cls(lam * mix.p1, lam * mix.p2)


@dataclass(frozen=True)
class BreakEvenLine:
    """The optimal set lambda1 + fd_weight * lambda2 = level, lambda1, lambda2 >= 0."""
    fd_weight: float
    level: float

    def contains(self, dens: LinkDensities, rel_tol: float = 1e-9) -> bool:
        return abs(dens.lambda1 + self.fd_weight * dens.lambda2 - self.level) <= rel_tol * self.level


@dataclass(frozen=True)
class ThroughputOptimum:
    """
    Global maximum of the throughput over (lambda1, lambda2).

    Attributes:
    t_max (float): Maximal throughput, nats per unit area per channel use.
    regime (Regime): Which kind of network attains it.
    optimal (LinkDensities): Maximiser; for BREAK_EVEN the representative point (1/H, 0).
    line (BreakEvenLine | None): The whole optimal line for BREAK_EVEN.
    """
    t_max: float
    regime: Regime
    optimal: LinkDensities
    line: Optional[BreakEvenLine] = None


def _functionals(cfg: NetworkConfig, need_F: bool, rel_tol: float) -> tuple[float, float]:
    H = spectral_H(cfg.s, cfg.alpha)
    F = pair_F(cfg.s, cfg.alpha, cfg.R, rel_tol) if need_F else 0.0
    return H, F


def throughput(dens: LinkDensities, cfg: NetworkConfig, si: SelfInterferenceModel,
               rel_tol: float = DEFAULT_REL_TOL) -> float:
    """
    T(lambda1, lambda2) = (lambda1 + 2 kappa lambda2) exp(-lambda1 H) exp(-lambda2 F) log(1 + theta).

    cfg.lam is not used; the densities carry the load.
    """
    if dens.total == 0:
        return 0.0
    H, F = _functionals(cfg, dens.lambda2 > 0, rel_tol)
    k = kappa(cfg, si)
    return ((dens.lambda1 + 2.0 * k * dens.lambda2) * math.exp(-dens.lambda1 * H - dens.lambda2 * F)
            * math.log1p(cfg.theta))


def throughput_from_mix(cfg: NetworkConfig, mix: DuplexMix, si: SelfInterferenceModel,
                        rel_tol: float = DEFAULT_REL_TOL) -> float:
    """
    Mode-sum form lambda p1 ps_hd log(1 + theta) + 2 lambda p2 ps_fd log(1 + theta):
    an FD link carries two packets per slot.
    """
    se = math.log1p(cfg.theta)
    hd = cfg.lam * mix.p1 * ps_hd(cfg, mix, rel_tol) * se if mix.p1 > 0 else 0.0
    fd = 2.0 * cfg.lam * mix.p2 * ps_fd(cfg, mix, si, rel_tol) * se if mix.p2 > 0 else 0.0
    return hd + fd


def throughput_gradient(dens: LinkDensities, cfg: NetworkConfig, si: SelfInterferenceModel,
                        rel_tol: float = DEFAULT_REL_TOL) -> tuple[float, float]:
    """
    Partial derivatives of T:
    dT/dlambda1 = e^(-lambda1 H - lambda2 F) log(1 + theta) [1 - H (lambda1 + 2 kappa lambda2)],
    dT/dlambda2 = e^(-lambda1 H - lambda2 F) log(1 + theta) [2 kappa - F (lambda1 + 2 kappa lambda2)].
    """
    H = spectral_H(cfg.s, cfg.alpha)
    F = pair_F(cfg.s, cfg.alpha, cfg.R, rel_tol)
    k = kappa(cfg, si)
    common = math.exp(-dens.lambda1 * H - dens.lambda2 * F) * math.log1p(cfg.theta)
    load = dens.lambda1 + 2.0 * k * dens.lambda2
    return common * (1.0 - H * load), common * (2.0 * k - F * load)


def throughput_grid(lambda1: np.ndarray, lambda2: np.ndarray, cfg: NetworkConfig,
                    si: SelfInterferenceModel, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """
    T on the tensor grid lambda1 x lambda2; H, F and kappa are evaluated once.

    Returns
    -------
    np.ndarray
        Shape (len(lambda1), len(lambda2)).
    """
    l1 = np.asarray(lambda1, dtype=float)[:, None]
    l2 = np.asarray(lambda2, dtype=float)[None, :]
    H, F = _functionals(cfg, True, rel_tol)
    k = kappa(cfg, si)
    return (l1 + 2.0 * k * l2) * np.exp(-l1 * H - l2 * F) * math.log1p(cfg.theta)


def t_hd_max(cfg: NetworkConfig) -> tuple[float, float]:
    """
    Maximal throughput of an HD-only network and its optimal link density.

    Returns
    -------
    tuple[float, float]
        (log(1 + theta) / (e H), 1 / H)
    """
    H = spectral_H(cfg.s, cfg.alpha)
    return math.log1p(cfg.theta) / (math.e * H), 1.0 / H


def t_fd_max(cfg: NetworkConfig, si: SelfInterferenceModel,
             rel_tol: float = DEFAULT_REL_TOL) -> tuple[float, float]:
    """
    Maximal throughput of an FD-only network and its optimal link density.

    Returns
    -------
    tuple[float, float]
        (2 kappa log(1 + theta) / (e F), 1 / F)
    """
    F = pair_F(cfg.s, cfg.alpha, cfg.R, rel_tol)
    k = kappa(cfg, si)
    return 2.0 * k * math.log1p(cfg.theta) / (math.e * F), 1.0 / F


def classify_regime(H: float, F: float, k: float) -> Regime:
    """Sign of F - 2 kappa H, with |F - 2 kappa H| <= BREAK_EVEN_TOL * F counted as a tie."""
    diff = F - 2.0 * k * H
    if abs(diff) <= BREAK_EVEN_TOL * F:
        return Regime.BREAK_EVEN
    return Regime.FD_ONLY if diff < 0 else Regime.HD_ONLY


def t_max(cfg: NetworkConfig, si: SelfInterferenceModel,
          rel_tol: float = DEFAULT_REL_TOL) -> ThroughputOptimum:
    """
    Global throughput maximum over (lambda1, lambda2) >= 0.

    FD-only wins when F < 2 kappa H, HD-only when F > 2 kappa H; on a tie every
    point of lambda1 + 2 kappa lambda2 = 1/H is optimal.
    """
    H, F = _functionals(cfg, True, rel_tol)
    k = kappa(cfg, si)
    regime = classify_regime(H, F, k)
    t_hd, l1_opt = t_hd_max(cfg)
    logger.debug(f"t_max: H={H:.9g} F={F:.9g} kappa={k:.9g} regime={regime.value}")

    if regime is Regime.FD_ONLY:
        t_fd, l2_opt = t_fd_max(cfg, si, rel_tol)
        return ThroughputOptimum(t_fd, regime, LinkDensities(0.0, l2_opt))
    if regime is Regime.HD_ONLY:
        return ThroughputOptimum(t_hd, regime, LinkDensities(l1_opt, 0.0))
    return ThroughputOptimum(t_hd, regime, LinkDensities(l1_opt, 0.0),
                             line=BreakEvenLine(fd_weight=2.0 * k, level=1.0 / H))


def critical_beta(cfg: NetworkConfig, K: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """
    SIPR at which FD-only and HD-only maximal throughputs break even:
    beta_c = K log(2H / F) / (theta R^alpha).

    beta_c is proportional to R^-alpha: F / H depends on theta only, so the log
    factor is fixed while s = theta R^alpha grows as R^alpha.
    """
    if not (K > 0):
        message = f"K must be > 0, got {K!r}"
        logger.error(message)
        raise ConfigurationError(message)
    H, F = _functionals(cfg, True, rel_tol)
    return K * math.log(2.0 * H / F) / cfg.s


def throughput_gain(cfg: NetworkConfig, si: SelfInterferenceModel,
                    rel_tol: float = DEFAULT_REL_TOL) -> tuple[float, float, float]:
    """
    Throughput gain of FD-only over HD-only and its bounds.

    Returns
    -------
    tuple[float, float, float]
        (2 kappa H / F, kappa, 2 kappa / (1 + delta)).
    """
    H, F = _functionals(cfg, True, rel_tol)
    k = kappa(cfg, si)
    return 2.0 * k * H / F, k, 2.0 * k / (1.0 + cfg.delta)


def spatial_efficiency(cfg: NetworkConfig, rel_tol: float = DEFAULT_REL_TOL) -> tuple[float, float]:
    """(1/H, 1/F): optimal HD-only and FD-only link densities."""
    H, F = _functionals(cfg, True, rel_tol)
    return 1.0 / H, 1.0 / F
