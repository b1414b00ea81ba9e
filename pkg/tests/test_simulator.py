import math
from types import SimpleNamespace

import numpy as np
import pytest

from src.core.analytic import kappa, ps_hd, spectral_H, success_probability
from src.core.errors import ConfigurationError, DomainError
from src.core.metrics import binomial_std_error
from src.core.model import DuplexMix, LinkState, NetworkConfig, SelfInterferenceModel, SuccessMode
from src.core.throughput import LinkDensities, t_fd_max, t_hd_max, throughput
from src.simulation.estimators import estimate_ps, estimate_throughput
from src.simulation.network import (
    MarkedNetwork,
    SimConfig,
    block_sizes,
    sample_network,
    window_radius,
)
from src.simulation.sir import realize_sir

K_WIFI = 10 ** -3.4


def _cfg(theta=1.0, lam=0.1, R=1.0, alpha=4.0):
    return NetworkConfig(lam=lam, theta=theta, R=R, alpha=alpha)


def _four_sigma(p, n):
    return 4.0 * math.sqrt(p * (1 - p) / n)


def test_window_radius_closed_form():
    '''
    lambda = 0.1, p1 = p2 = 0.5, theta = 1, R = 1, alpha = 4, eps = 1e-3.
    '''
    mix = DuplexMix.from_active(0.5, 0.5)
    radius = window_radius(_cfg(), mix, 1e-3)
    assert radius == pytest.approx(math.sqrt(2 * math.pi * 0.1 * 1.5 / 2e-3), rel=1e-12)
    assert radius == pytest.approx(21.71, abs=0.01)


def test_window_radius_grows_as_epsilon_shrinks():
    mix = DuplexMix.hd_only()
    wide = window_radius(_cfg(), mix, 5e-4)
    narrow = window_radius(_cfg(), mix, 1e-3)
    assert wide == pytest.approx(math.sqrt(2.0) * narrow, rel=1e-12)


def test_window_radius_never_below_link_distance():
    assert window_radius(_cfg(theta=1e-9), DuplexMix.hd_only()) == 1.0
    assert window_radius(_cfg(), DuplexMix(1.0, 0.0, 0.0)) == 1.0


def test_window_radius_needs_alpha_above_two():
    '''
    NetworkConfig rejects alpha <= 2 itself; a duck-typed config reaches the window check.
    '''
    cfg = SimpleNamespace(lam=0.1, R=1.0, alpha=2.0, s=1.0)
    with pytest.raises(DomainError):
        window_radius(cfg, DuplexMix.hd_only())


def test_sample_count_is_poisson():
    cfg = _cfg()
    rng = np.random.default_rng(11)
    counts = [len(sample_network(cfg, DuplexMix.hd_only(), 5.0, rng)) for _ in range(10_000)]
    assert np.mean(counts) == pytest.approx(0.1 * math.pi * 25.0, abs=0.4)


def test_sample_geometry_and_states():
    cfg = _cfg(lam=1.0, R=2.5)
    mix = DuplexMix(0.2, 0.3, 0.5)
    net = sample_network(cfg, mix, 30.0, np.random.default_rng(3))
    assert len(net) > 2000
    assert np.all(np.hypot(*net.positions.T) <= 30.0)
    assert np.allclose(np.hypot(*(net.marks - net.positions).T), 2.5)
    for state, p in zip(LinkState, (0.2, 0.3, 0.5)):
        assert np.mean(net.states == state) == pytest.approx(p, abs=0.05)
    links = list(net.links())
    assert len(links) == len(net)
    assert links[0].state == LinkState(int(net.states[0]))


def test_transmitters_include_fd_partners():
    net = MarkedNetwork(
        positions=np.array([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]),
        marks=np.array([[1.0, 1.0], [2.0, 1.0], [3.0, 1.0]]),
        states=np.array([LinkState.SILENT, LinkState.HD, LinkState.FD], dtype=np.int8),
    )
    assert net.transmitters().shape == (3, 2)
    assert net.transmitters(include_marks=False).shape == (2, 2)


def test_block_sizes_cover_trials():
    assert block_sizes(600, 256) == [256, 256, 88]
    assert block_sizes(256, 256) == [256]
    assert sum(block_sizes(10_001)) == 10_001


def test_silent_typical_link_rejected():
    with pytest.raises(ValueError):
        realize_sir(LinkState.SILENT, MarkedNetwork.empty(), _cfg(), SelfInterferenceModel.perfect(),
                    np.random.default_rng(0))


def test_empty_network_hd_never_fails():
    sir = realize_sir(LinkState.HD, MarkedNetwork.empty(), _cfg(), SelfInterferenceModel(1e-4, K_WIFI),
                      np.random.default_rng(0))
    assert sir == math.inf


def test_empty_network_fd_succeeds_with_kappa():
    '''
    With no interferers only the residual self-interference remains: P(SIR > theta) = kappa.
    '''
    cfg = _cfg()
    si = SelfInterferenceModel(1e-4, K_WIFI)
    rng = np.random.default_rng(5)
    n = 20_000
    hits = sum(realize_sir(LinkState.FD, MarkedNetwork.empty(), cfg, si, rng) > cfg.theta for _ in range(n))
    k = kappa(cfg, si)
    assert abs(hits / n - k) <= _four_sigma(k, n)


def test_single_interferer():
    '''
    One HD interferer at distance d: P(SIR > theta) = 1 / (1 + theta R^alpha d^-alpha).
    '''
    cfg = _cfg()
    net = MarkedNetwork(np.array([[2.0, 0.0]]), np.array([[2.0, 1.0]]),
                        np.array([LinkState.HD], dtype=np.int8))
    rng = np.random.default_rng(9)
    n = 20_000
    hits = sum(realize_sir(LinkState.HD, net, cfg, SelfInterferenceModel.perfect(), rng) > cfg.theta
               for _ in range(n))
    expected = 1.0 / (1.0 + 2.0 ** -4)
    assert abs(hits / n - expected) <= _four_sigma(expected, n)


def test_zero_trials_rejected():
    with pytest.raises(ConfigurationError):
        SimConfig(trials=0, seed=1)
    with pytest.raises(ConfigurationError):
        SimConfig(trials=10, seed=-1)


@pytest.mark.parametrize("kwargs", [
    {"trials": 10, "seed": 1, "truncation_epsilon": 0.0},
    {"trials": 10, "seed": 1, "confidence_level": 1.0},
])
def test_sim_config_rejections_are_logged(kwargs, caplog):
    with caplog.at_level("ERROR", logger="simulator"):
        with pytest.raises(ConfigurationError):
            SimConfig(**kwargs)
    assert [r.levelname for r in caplog.records if r.name == "simulator"] == ["ERROR"]


def test_sampling_rejects_empty_disk(caplog):
    with caplog.at_level("ERROR", logger="simulator"):
        with pytest.raises(ConfigurationError):
            sample_network(_cfg(), DuplexMix.hd_only(), 0.0, np.random.default_rng(0))
    assert any(r.levelname == "ERROR" for r in caplog.records)


def test_estimate_independent_of_worker_count():
    cfg = _cfg()
    mix = DuplexMix.from_active(0.4, 0.6)
    si = SelfInterferenceModel(1e-4, K_WIFI)
    sim = SimConfig(trials=600, seed=2015)
    one = estimate_ps(cfg, mix, si, SuccessMode.UNCONDITIONAL, sim, workers=1)
    two = estimate_ps(cfg, mix, si, SuccessMode.UNCONDITIONAL, sim, workers=2)
    assert one == two


def test_tiny_threshold_almost_always_succeeds():
    est = estimate_ps(_cfg(theta=1e-9), DuplexMix.hd_only(), SelfInterferenceModel.perfect(),
                      SuccessMode.HD, SimConfig(trials=500, seed=1), workers=1)
    assert est.estimate >= 0.999


def test_all_silent_unconditional_is_zero():
    est = estimate_ps(_cfg(), DuplexMix(1.0, 0.0, 0.0), SelfInterferenceModel.perfect(),
                      SuccessMode.UNCONDITIONAL, SimConfig(trials=10, seed=1), workers=1)
    assert est.estimate == 0.0 and est.ci_high == 0.0


def test_dropping_partner_interference():
    '''
    Without the partner nodes the FD interferers form a PPP of density lambda (p1 + p2).
    '''
    cfg = _cfg()
    mix = DuplexMix.from_active(0.5, 0.5)
    sim = SimConfig(trials=3000, seed=77, include_mark_interference=False)
    est = estimate_ps(cfg, mix, SelfInterferenceModel.perfect(), SuccessMode.FD, sim, workers=1)
    expected = math.exp(-cfg.lam * mix.active * spectral_H(cfg.s, cfg.alpha))
    assert abs(est.estimate - expected) <= _four_sigma(expected, sim.trials)


def test_fd_estimate_monotone_in_beta():
    '''
    beta only enters the denominator and the substreams do not depend on it.
    '''
    cfg = _cfg()
    mix = DuplexMix.from_active(0.5, 0.5)
    sim = SimConfig(trials=800, seed=4)
    estimates = [estimate_ps(cfg, mix, SelfInterferenceModel(beta, K_WIFI), SuccessMode.FD, sim, workers=1).estimate
                 for beta in (0.0, 1e-5, 1e-4, 1e-3)]
    assert all(a >= b for a, b in zip(estimates, estimates[1:]))
    assert estimates[0] > estimates[-1]


@pytest.mark.slow
@pytest.mark.parametrize("mode", list(SuccessMode))
def test_analytic_inside_interval(mode):
    cfg = _cfg()
    mix = DuplexMix(0.2, 0.4, 0.4)
    si = SelfInterferenceModel(1e-4, K_WIFI)
    sim = SimConfig(trials=20_000, seed=2015, confidence_level=0.999)
    est = estimate_ps(cfg, mix, si, mode, sim)
    assert est.contains(success_probability(cfg, mix, si, mode))


@pytest.mark.slow
def test_interval_coverage_over_seeds():
    '''
    99% Wilson intervals over 100 seeds contain the analytic value at least 95 times.
    '''
    cfg = _cfg(lam=0.05)
    mix = DuplexMix.hd_only()
    si = SelfInterferenceModel.perfect()
    exact = ps_hd(cfg, mix)
    covered = sum(
        estimate_ps(cfg, mix, si, SuccessMode.HD, SimConfig(trials=400, seed=seed), workers=1).contains(exact)
        for seed in range(100)
    )
    assert covered >= 95


@pytest.mark.slow
def test_doubling_window_moves_estimate_less_than_one_std_error():
    '''
    Networks drawn on 2 R_w and cut back to R_w: the interferers in the outer ring flip
    fewer outcomes than one standard error of a 1e5-trial estimate.
    '''
    cfg = _cfg()
    mix = DuplexMix(0.0, 0.5, 0.5)
    radius = window_radius(cfg, mix)
    rng = np.random.default_rng(2015)
    trials, inner_wins, full_wins = 20_000, 0, 0
    for _ in range(trials):
        points = sample_network(cfg, mix, 2.0 * radius, rng).transmitters()
        d2 = np.einsum("ij,ij->i", points, points)
        terms = rng.exponential(size=d2.shape[0]) * d2 ** (-cfg.alpha / 2.0)
        signal = rng.exponential() * cfg.R ** (-cfg.alpha)
        inner_wins += bool(signal > cfg.theta * terms[d2 <= radius * radius].sum())
        full_wins += bool(signal > cfg.theta * terms.sum())
    shift = (inner_wins - full_wins) / trials
    assert 0.0 <= shift < binomial_std_error(full_wins / trials, 100_000)


THROUGHPUT_CASES = [
    # theta, R, alpha, beta, (lambda1, lambda2)
    (2.0, 1.0, 4.0, 1e-5, (0.04, 0.06)),
    (1.0, 1.0, 5.0, 0.0, (0.05, 0.05)),
    (1.0, 2.0, 4.0, 1e-6, (0.01, 0.02)),
]


@pytest.mark.slow
@pytest.mark.parametrize("theta, R, alpha, beta, dens", THROUGHPUT_CASES)
def test_throughput_estimate_interval(theta, R, alpha, beta, dens):
    cfg = _cfg(theta=theta, R=R, alpha=alpha)
    si = SelfInterferenceModel(beta, K_WIFI)
    dens = LinkDensities(*dens)
    sim = SimConfig(trials=20_000, seed=8, confidence_level=0.999)
    est = estimate_throughput(dens, cfg, si, sim)
    assert est.contains(throughput(dens, cfg, si))
    assert est.std_error > 0


@pytest.mark.slow
def test_throughput_estimate_at_hd_optimum():
    cfg = _cfg()
    si = SelfInterferenceModel.perfect()
    t_hd, lambda1 = t_hd_max(cfg)
    sim = SimConfig(trials=20_000, seed=21, confidence_level=0.999)
    assert estimate_throughput(LinkDensities(lambda1, 0.0), cfg, si, sim).contains(t_hd)


@pytest.mark.slow
def test_throughput_estimate_at_fd_optimum():
    cfg = _cfg()
    si = SelfInterferenceModel(1e-5, K_WIFI)
    t_fd, lambda2 = t_fd_max(cfg, si)
    sim = SimConfig(trials=20_000, seed=22, confidence_level=0.999)
    assert estimate_throughput(LinkDensities(0.0, lambda2), cfg, si, sim).contains(t_fd)
