import math
import logging
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ..core.errors import ConfigurationError, DomainError
from ..core.model import DuplexMix, LinkState, NetworkConfig

logger = logging.getLogger('simulator')

BLOCK_SIZE = 256
LOW_TRIAL_THRESHOLD = 100
DEFAULT_TRUNCATION_EPSILON = 1e-3


def _reject(error: type[Exception], message: str) -> None:
    logger.error(message)
    raise error(message)


@dataclass(frozen=True)
class MarkedLink:
    """
    One link of the marked PPP.

    Attributes:
    position (tuple[float, float]): Transmitter x.
    mark_position (tuple[float, float]): Partner m(x) = x + R (cos phi, sin phi).
    state (LinkState): SILENT, HD or FD.
    """
    position: tuple[float, float]
    mark_position: tuple[float, float]
    state: LinkState


@dataclass(frozen=True)
class MarkedNetwork:
    """
    A sampled network held as arrays; positions and marks have shape (n, 2).
    """
    positions: np.ndarray
    marks: np.ndarray
    states: np.ndarray

    def __len__(self) -> int:
        return int(self.states.shape[0])

    def links(self) -> Iterator[MarkedLink]:
        for x, m, s in zip(self.positions, self.marks, self.states):
            yield MarkedLink((float(x[0]), float(x[1])), (float(m[0]), float(m[1])), LinkState(int(s)))

    def transmitters(self, include_marks: bool = True) -> np.ndarray:
        """
        Every transmitting node: x for HD and FD links, plus m(x) for FD links.
        """
        tx = self.positions[self.states != LinkState.SILENT]
        if not include_marks:
            return tx
        return np.concatenate([tx, self.marks[self.states == LinkState.FD]], axis=0)

    @classmethod
    def empty(cls) -> "MarkedNetwork":
        return cls(np.empty((0, 2)), np.empty((0, 2)), np.empty(0, dtype=np.int8))


@dataclass(frozen=True)
class SimConfig:
    """
    Monte Carlo settings.

    Attributes:
    trials (int): Number of trials, >= 1.
    seed (int): Master seed, a non-negative 64-bit integer.
    truncation_epsilon (float): Bound on the scaled mean interference neglected outside the window.
    confidence_level (float): Coverage of the reported intervals.
    include_mark_interference (bool): Debug switch; False drops the partner nodes of FD links.
    """
    trials: int
    seed: int
    truncation_epsilon: float = DEFAULT_TRUNCATION_EPSILON
    confidence_level: float = 0.99
    include_mark_interference: bool = True

    def __post_init__(self):
        if not (isinstance(self.trials, (int, np.integer)) and self.trials >= 1):
            _reject(ConfigurationError, f"trials must be an integer >= 1, got {self.trials!r}")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2 ** 64):
            _reject(ConfigurationError, f"seed must be a non-negative 64-bit integer, got {self.seed!r}")
        if not (self.truncation_epsilon > 0):
            _reject(ConfigurationError, f"truncation_epsilon must be > 0, got {self.truncation_epsilon!r}")
        if not (0.0 < self.confidence_level < 1.0):
            _reject(ConfigurationError, f"confidence_level must be in (0, 1), got {self.confidence_level!r}")

    @property
    def low_trials(self) -> bool:
        return self.trials <= LOW_TRIAL_THRESHOLD


def window_radius(cfg: NetworkConfig, mix: DuplexMix, epsilon: float = DEFAULT_TRUNCATION_EPSILON) -> float:
    """
    Radius R_w of the simulation disk.

    The mean interference from transmitters beyond R_w, scaled by theta R^alpha, is
    2 pi lambda (p1 + 2 p2) theta R^alpha R_w^(2 - alpha) / (alpha - 2); R_w makes it
    equal epsilon.

    Returns
    -------
    float
        R_w, at least R.

    Raises
    ------
    DomainError
        If alpha <= 2, where the tail diverges.
    """
    if not (cfg.alpha > 2):
        _reject(DomainError, f"alpha must be > 2 for a finite window, got {cfg.alpha}")
    if not (epsilon > 0):
        _reject(ConfigurationError, f"epsilon must be > 0, got {epsilon!r}")
    tx_density = cfg.lam * (mix.p1 + 2.0 * mix.p2)
    if tx_density == 0:
        return cfg.R
    radius = (2.0 * math.pi * tx_density * cfg.s / ((cfg.alpha - 2.0) * epsilon)) ** (1.0 / (cfg.alpha - 2.0))
    return max(radius, cfg.R)


def sample_network(cfg: NetworkConfig, mix: DuplexMix, radius: float,
                   rng: np.random.Generator) -> MarkedNetwork:
    """
    Draw the marked PPP in the disk of the given radius around the origin.

    The count is Poisson(lambda pi radius^2), radii are radius * sqrt(U) and angles
    uniform; each mark sits at distance R at an independent uniform angle and the
    states are drawn from (p0, p1, p2).
    """
    if not (radius > 0):
        _reject(ConfigurationError, f"radius must be > 0, got {radius!r}")
    n = int(rng.poisson(cfg.lam * math.pi * radius * radius))
    if n == 0:
        return MarkedNetwork.empty()
    rho = radius * np.sqrt(rng.random(n))
    angle = rng.uniform(0.0, 2.0 * math.pi, n)
    positions = np.column_stack([rho * np.cos(angle), rho * np.sin(angle)])
    phi = rng.uniform(0.0, 2.0 * math.pi, n)
    marks = positions + cfg.R * np.column_stack([np.cos(phi), np.sin(phi)])
    states = rng.choice(3, size=n, p=[mix.p0, mix.p1, mix.p2]).astype(np.int8)
    return MarkedNetwork(positions, marks, states)


def block_generators(seed: int, stream: int, block: int) -> tuple[np.random.Generator, np.random.Generator]:
    """
    Independent (topology, fading) generators for one block of trials.

    Keyed by (seed, stream, block) only, so a block draws the same numbers
    whichever worker runs it.
    """
    root = np.random.SeedSequence([int(seed), int(stream), int(block)])
    ss_topology, ss_fading = root.spawn(2)
    return np.random.default_rng(ss_topology), np.random.default_rng(ss_fading)


def block_sizes(trials: int, block_size: int = BLOCK_SIZE) -> list[int]:
    full, rest = divmod(trials, block_size)
    return [block_size] * full + ([rest] if rest else [])
