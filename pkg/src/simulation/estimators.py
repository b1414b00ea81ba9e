import math
import logging
from dataclasses import dataclass, replace
from typing import Optional

from ..core.errors import ConfigurationError
from ..core.metrics import binomial_std_error, normal_interval, wilson_interval
from ..core.model import DuplexMix, LinkState, NetworkConfig, SelfInterferenceModel, SuccessMode
from ..core.parallel import ordered_map
from ..core.throughput import LinkDensities
from .network import SimConfig, block_generators, block_sizes, sample_network, window_radius
from .sir import realize_sir

logger = logging.getLogger('simulator')

# substream ids, one per estimated quantity
STREAMS = {SuccessMode.HD: 1, SuccessMode.FD: 2, SuccessMode.UNCONDITIONAL: 3}


@dataclass(frozen=True)
class EstimateWithCI:
    """
    Monte Carlo estimate with its confidence interval.

    Attributes:
    estimate (float): Point estimate.
    std_error (float): Standard error of the estimate.
    ci_low, ci_high (float): Interval at the configured confidence level.
    trials (int): Trials behind the estimate.
    """
    estimate: float
    std_error: float
    ci_low: float
    ci_high: float
    trials: int

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high


@dataclass(frozen=True)
class _BlockTask:
    cfg: NetworkConfig
    mix: DuplexMix
    si: SelfInterferenceModel
    mode: SuccessMode
    sim: SimConfig
    radius: float
    stream: int
    block: int
    size: int


def _count_block(task: _BlockTask) -> int:
    """Successes in one block of trials; module level so worker processes can unpickle it."""
    topo_rng, fading_rng = block_generators(task.sim.seed, task.stream, task.block)
    hd_share = task.mix.p1 / task.mix.active if task.mode is SuccessMode.UNCONDITIONAL else 0.0
    successes = 0
    for _ in range(task.size):
        if task.mode is SuccessMode.HD:
            state = LinkState.HD
        elif task.mode is SuccessMode.FD:
            state = LinkState.FD
        else:
            state = LinkState.HD if topo_rng.random() < hd_share else LinkState.FD
        network = sample_network(task.cfg, task.mix, task.radius, topo_rng)
        sir = realize_sir(state, network, task.cfg, task.si, fading_rng,
                          include_mark_interference=task.sim.include_mark_interference)
        if sir > task.cfg.theta:
            successes += 1
    return successes


def estimate_ps(cfg: NetworkConfig, mix: DuplexMix, si: SelfInterferenceModel, mode: SuccessMode,
                sim: SimConfig, workers: Optional[int] = None) -> EstimateWithCI:
    """
    Monte Carlo estimate of a success probability with a Wilson score interval.

    Each trial draws a fresh network in the window of radius window_radius(cfg, mix,
    sim.truncation_epsilon) and fresh fading, and counts SIR > theta. Trials are
    grouped in blocks with their own substreams and the counts are exact integers,
    so the result does not depend on `workers`.

    UNCONDITIONAL draws the typical link HD with probability p1 / (p1 + p2), FD
    otherwise, and scales the estimate and its interval by p1 + p2.

    Parameters
    ----------
    mode : SuccessMode
        Which probability is estimated.
    workers : int, optional
        Worker processes; see resolve_workers.

    Returns
    -------
    EstimateWithCI
    """
    if sim.trials < 1:
        message = f"trials must be >= 1, got {sim.trials}"
        logger.error(message)
        raise ConfigurationError(message)
    if sim.low_trials:
        logger.warning(f"only {sim.trials} trials; confidence intervals are unreliable")
    weight = 1.0
    if mode is SuccessMode.UNCONDITIONAL:
        weight = mix.active
        if weight == 0:
            return EstimateWithCI(0.0, 0.0, 0.0, 0.0, sim.trials)

    radius = window_radius(cfg, mix, sim.truncation_epsilon)
    stream = STREAMS[mode]
    tasks = [_BlockTask(cfg, mix, si, mode, sim, radius, stream, b, n)
             for b, n in enumerate(block_sizes(sim.trials))]
    logger.debug(f"estimate_ps {mode.value}: theta={cfg.theta:.6g} R_w={radius:.4g} "
                 f"{sim.trials} trials in {len(tasks)} blocks")
    successes = sum(ordered_map(_count_block, tasks, workers))

    p_hat = successes / sim.trials
    low, high = wilson_interval(successes, sim.trials, sim.confidence_level)
    return EstimateWithCI(
        estimate=weight * p_hat,
        std_error=weight * binomial_std_error(p_hat, sim.trials),
        ci_low=weight * low,
        ci_high=weight * high,
        trials=sim.trials,
    )


def estimate_throughput(dens: LinkDensities, cfg: NetworkConfig, si: SelfInterferenceModel,
                        sim: SimConfig, workers: Optional[int] = None) -> EstimateWithCI:
    """
    Monte Carlo throughput lambda1 p_HD log(1 + theta) + 2 lambda2 p_FD log(1 + theta).

    p_HD and p_FD come from independent substreams, so their standard errors add in
    quadrature; the interval is normal. cfg.lam is replaced by lambda1 + lambda2.
    """
    total = dens.total
    if total == 0:
        return EstimateWithCI(0.0, 0.0, 0.0, 0.0, sim.trials)
    net = replace(cfg, lam=total)
    mix = DuplexMix.from_active(dens.lambda1 / total, dens.lambda2 / total)
    se = math.log1p(cfg.theta)

    estimate, variance = 0.0, 0.0
    if dens.lambda1 > 0:
        hd = estimate_ps(net, mix, si, SuccessMode.HD, sim, workers)
        estimate += dens.lambda1 * se * hd.estimate
        variance += (dens.lambda1 * se * hd.std_error) ** 2
    if dens.lambda2 > 0:
        fd = estimate_ps(net, mix, si, SuccessMode.FD, sim, workers)
        estimate += 2.0 * dens.lambda2 * se * fd.estimate
        variance += (2.0 * dens.lambda2 * se * fd.std_error) ** 2

    std_error = math.sqrt(variance)
    low, high = normal_interval(estimate, std_error, sim.confidence_level)
    return EstimateWithCI(estimate, std_error, low, high, sim.trials)
