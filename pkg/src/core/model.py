import math
import numbers
import logging
from dataclasses import dataclass, replace
from enum import Enum, IntEnum

from .errors import ConfigurationError

logger = logging.getLogger('model')

SPEED_OF_LIGHT = 299_792_458.0
PROB_SUM_TOL = 1e-9


class LinkState(IntEnum):
    """State mark s(x) of a link."""
    SILENT = 0
    HD = 1
    FD = 2


class SuccessMode(str, Enum):
    """Which success probability is meant: conditioned on the typical link state, or averaged."""
    HD = "HD"
    FD = "FD"
    UNCONDITIONAL = "UNCONDITIONAL"


def _fail(message: str) -> None:
    logger.error(message)
    raise ConfigurationError(message)


def _require_positive(name: str, value: float) -> None:
    if not (isinstance(value, numbers.Real) and math.isfinite(value) and value > 0):
        _fail(f"{name} must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class NetworkConfig:
    """
    A network configuration (lambda, theta, R, alpha).

    Attributes:
    lam (float): Node density, nodes per unit area.
    theta (float): SIR threshold, linear.
    R (float): Link distance shared by every link.
    alpha (float): Path-loss exponent, strictly above 2.
    """
    lam: float
    theta: float
    R: float
    alpha: float

    def __post_init__(self):
        _require_positive("lambda", self.lam)
        _require_positive("theta", self.theta)
        _require_positive("R", self.R)
        if not (isinstance(self.alpha, numbers.Real) and math.isfinite(self.alpha) and self.alpha > 2):
            _fail(f"alpha must be > 2 for the interference to converge, got {self.alpha!r}")

    @property
    def delta(self) -> float:
        return 2.0 / self.alpha

    @property
    def s(self) -> float:
        """Laplace argument theta * R^alpha at which every functional is evaluated."""
        return self.theta * self.R ** self.alpha

    def with_theta(self, theta: float) -> "NetworkConfig":
        return replace(self, theta=theta)


@dataclass(frozen=True)
class DuplexMix:
    """
    Link-state probabilities (p0 silent, p1 HD, p2 FD).
    """
    p0: float
    p1: float
    p2: float

    def __post_init__(self):
        for name, p in (("p0", self.p0), ("p1", self.p1), ("p2", self.p2)):
            if not (isinstance(p, numbers.Real) and 0.0 <= p <= 1.0):
                _fail(f"{name} must lie in [0, 1], got {p!r}")
        total = self.p0 + self.p1 + self.p2
        if abs(total - 1.0) > PROB_SUM_TOL:
            _fail(f"p0 + p1 + p2 must equal 1, got {total!r}")

    @classmethod
    def from_active(cls, p1: float, p2: float) -> "DuplexMix":
        """Build a mix from the two MAPs, the silent share taking the remainder."""
        return cls(p0=max(0.0, 1.0 - p1 - p2), p1=p1, p2=p2)

    @classmethod
    def hd_only(cls) -> "DuplexMix":
        return cls(0.0, 1.0, 0.0)

    @classmethod
    def fd_only(cls) -> "DuplexMix":
        return cls(0.0, 0.0, 1.0)

    @property
    def active(self) -> float:
        return self.p1 + self.p2


@dataclass(frozen=True)
class SelfInterferenceModel:
    """
    Residual self-interference after cancellation.

    Attributes:
    beta (float): SIPR in [0, 1]; 0 is perfect cancellation.
    K (float): Propagation constant G_tx G_rx (c_L / 4 pi f_c)^2.
    """
    beta: float
    K: float

    def __post_init__(self):
        if not (isinstance(self.beta, numbers.Real) and 0.0 <= self.beta <= 1.0):
            _fail(f"beta must lie in [0, 1], got {self.beta!r}")
        _require_positive("K", self.K)

    @classmethod
    def perfect(cls, K: float = 1.0) -> "SelfInterferenceModel":
        return cls(beta=0.0, K=K)

    @classmethod
    def from_antenna(cls, beta: float, g_tx: float, g_rx: float, f_c: float,
                     c_light: float = SPEED_OF_LIGHT) -> "SelfInterferenceModel":
        """Build the model with K derived from antenna gains and carrier frequency."""
        return cls(beta=beta, K=antenna_constant(g_tx, g_rx, f_c, c_light))

    def with_beta(self, beta: float) -> "SelfInterferenceModel":
        return replace(self, beta=beta)


def antenna_constant(g_tx: float, g_rx: float, f_c: float, c_light: float = SPEED_OF_LIGHT) -> float:
    """
    Propagation constant K = G_tx * G_rx * (c_L / (4 pi f_c))^2.
    """
    for name, value in (("G_tx", g_tx), ("G_rx", g_rx), ("f_c", f_c), ("c_L", c_light)):
        _require_positive(name, value)
    return g_tx * g_rx * (c_light / (4.0 * math.pi * f_c)) ** 2
