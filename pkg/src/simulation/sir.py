import math

import numpy as np

from ..core.model import LinkState, NetworkConfig, SelfInterferenceModel
from .network import MarkedNetwork


def realize_sir(mode: LinkState, network: MarkedNetwork, cfg: NetworkConfig, si: SelfInterferenceModel,
                rng: np.random.Generator, include_mark_interference: bool = True) -> float:
    """
    One SIR realisation at the typical receiver.

    The receiver sits at the origin and its transmitter at (R, 0); the typical link
    is not part of `network`. Every fading gain is unit-mean exponential and fresh.

    Parameters
    ----------
    mode : LinkState
        HD or FD state of the typical link; FD adds the residual self-interference beta / K.
    network : MarkedNetwork
        Interfering links.
    include_mark_interference : bool
        False drops the partner nodes of FD links from the interference.

    Returns
    -------
    float
        h R^-alpha / (sum_z h_z |z|^-alpha + beta 1_FD / K), or +inf when the denominator is 0.
    """
    mode = LinkState(mode)
    if mode == LinkState.SILENT:
        raise ValueError("a silent typical link has no SIR")
    signal = rng.exponential() * cfg.R ** (-cfg.alpha)

    points = network.transmitters(include_marks=include_mark_interference)
    if points.shape[0]:
        d2 = np.einsum("ij,ij->i", points, points)
        gains = rng.exponential(size=points.shape[0])
        interference = float(np.sum(gains * d2 ** (-cfg.alpha / 2.0)))
    else:
        interference = 0.0

    if mode is LinkState.FD:
        interference += si.beta / si.K
    if interference == 0.0:
        return math.inf
    return signal / interference
