import math
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

from scipy import optimize, special

from .errors import DomainError, InversionError
from .model import DuplexMix, NetworkConfig, SelfInterferenceModel, SuccessMode
from .quadrature import (
    DEFAULT_MAX_EVALUATIONS,
    DEFAULT_REL_TOL,
    IntegrationResult,
    integrate_finite,
    integrate_semi_infinite,
)

logger = logging.getLogger('analytic')

SuccessCurve = Callable[[float], float]

INVERSION_XTOL = 1e-10
INVERSION_MAX_EXPANSIONS = 60
DEFAULT_BRACKET = (1e-3, 1e3)
BOUND_SLACK = 1e-6
F_CACHE_SIZE = 8192


def _reject(error: type[Exception], message: str) -> None:
    logger.error(message)
    raise error(message)


@dataclass(frozen=True)
class SuccessBounds:
    """
    Closed-form bounds of a success probability, with the exact value when it was evaluated.

    Attributes:
    lower (float): Lower bound (independent-PPP bound).
    exact (float | None): Exact value through the F integral.
    upper (float): Upper bound (Cauchy-Schwarz bound, equal to the equal-distance approximation).
    """
    lower: float
    exact: Optional[float]
    upper: float

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper <= 1.0):
            _reject(DomainError, f"bounds out of order: lower={self.lower} upper={self.upper}")
        if self.exact is not None:
            slack = BOUND_SLACK * max(self.upper, 1e-300)
            if self.exact < self.lower - slack or self.exact > self.upper + slack:
                _reject(DomainError, f"exact {self.exact} outside [{self.lower}, {self.upper}]")


def _check_alpha(alpha: float) -> float:
    if not (alpha > 2):
        _reject(DomainError, f"alpha must be > 2, got {alpha}")
    return 2.0 / alpha


def spectral_H(s: float, alpha: float) -> float:
    """
    Interference functional of a PPP of single transmitters: H(s, alpha) = pi^2 delta s^delta / sin(pi delta).

    Parameters
    ----------
    s : float
        Laplace argument, s >= 0 (theta * R^alpha in every caller).
    alpha : float
        Path-loss exponent, > 2.

    Returns
    -------
    float
    """
    delta = _check_alpha(alpha)
    if s < 0:
        _reject(DomainError, f"s must be >= 0, got {s}")
    if s == 0:
        return 0.0
    return math.pi ** 2 * delta * s ** delta / math.sin(math.pi * delta)


def _partner_kernel(r: float, s: float, alpha: float, R: float, rel_tol: float) -> tuple[float, int]:
    """
    J(r) = int_0^{2 pi} s / (s + |x + R e|^alpha) dphi for |x| = r, folded onto [0, pi].

    Returns (J, evaluations).
    """
    half_alpha = alpha / 2.0
    gap2 = (r - R) ** 2
    four_rR = 4.0 * r * R

    def integrand(phi: float) -> float:
        # r^2 + R^2 + 2 r R cos(phi) without cancellation near phi = pi
        c = math.cos(0.5 * phi)
        d2 = gap2 + four_rR * c * c
        return s / (s + d2 ** half_alpha)

    res = integrate_finite(integrand, 0.0, math.pi, rel_tol=rel_tol, abs_floor=0.0)
    return 2.0 * res.value, res.evaluations


def _pair_F_integral(s: float, alpha: float, R: float, rel_tol: float,
                     max_evaluations: int) -> IntegrationResult:
    """
    F(s, alpha, R) = int_0^inf int_0^{2 pi} (1 - v) dphi r dr with
    v = 1 / ((1 + s r^-alpha)(1 + s |m|^-alpha)).

    The integrand is evaluated as t_a + (1 - t_a) t_b, t = s / (s + d^alpha),
    which stays accurate in the far field where 1 - v is tiny.
    """
    inner_tol = 0.1 * rel_tol
    inner_evals = [0]

    def radial(r: float) -> float:
        if r == 0.0:
            return 0.0
        ra = r ** alpha
        t_a = s / (s + ra)
        one_minus_t_a = ra / (s + ra)
        J, n = _partner_kernel(r, s, alpha, R, inner_tol)
        inner_evals[0] += n
        return (2.0 * math.pi * t_a + one_minus_t_a * J) * r

    knee = s ** (1.0 / alpha)
    res = integrate_semi_infinite(radial, 0.0, rel_tol=rel_tol, max_evaluations=max_evaluations,
                                  breakpoints=[R, knee])
    total = res.evaluations + inner_evals[0]
    logger.debug(f"F(s={s:.6g}, alpha={alpha}, R={R}) = {res.value:.12g} "
                 f"(err {res.abs_error_estimate:.2g}, {total} evaluations)")
    return IntegrationResult(res.value, res.abs_error_estimate, total)


@lru_cache(maxsize=F_CACHE_SIZE)
def _unit_pair_F(theta: float, alpha: float, rel_tol: float, max_evaluations: int) -> IntegrationResult:
    return _pair_F_integral(theta, alpha, 1.0, rel_tol, max_evaluations)


def pair_F(s: float, alpha: float, R: float, rel_tol: float = DEFAULT_REL_TOL,
           max_evaluations: int = DEFAULT_MAX_EVALUATIONS) -> float:
    """
    Interference functional of a PPP of transmitting pairs at distance R.

    Evaluated in the R-normalised form F(s, alpha, R) = R^2 F(s / R^alpha, alpha, 1),
    so one memoised integral per (s / R^alpha, alpha) serves every R.

    Parameters
    ----------
    s : float
        Laplace argument, >= 0.
    alpha : float
        Path-loss exponent, > 2.
    R : float
        Partner distance, > 0.
    rel_tol : float
        Relative tolerance of the outer integral.

    Returns
    -------
    float
        F, which satisfies (1 + delta) H <= F <= 2 H.

    Raises
    ------
    QuadratureError
        Propagated from the integration engine.
    """
    _check_alpha(alpha)
    if R <= 0:
        _reject(DomainError, f"R must be > 0, got {R}")
    if s < 0:
        _reject(DomainError, f"s must be >= 0, got {s}")
    if s == 0:
        return 0.0
    theta = s / R ** alpha
    return R * R * _unit_pair_F(float(theta), float(alpha), float(rel_tol), int(max_evaluations)).value


def pair_F_direct(s: float, alpha: float, R: float, rel_tol: float = DEFAULT_REL_TOL,
                  max_evaluations: int = DEFAULT_MAX_EVALUATIONS) -> float:
    """F evaluated on the original radial variable, without normalisation or memoisation."""
    _check_alpha(alpha)
    if R <= 0:
        _reject(DomainError, f"R must be > 0, got {R}")
    if s == 0:
        return 0.0
    return _pair_F_integral(s, alpha, R, rel_tol, max_evaluations).value


def kappa(cfg: NetworkConfig, si: SelfInterferenceModel) -> float:
    """Residual self-interference penalty exp(-theta R^alpha beta / K)."""
    return math.exp(-cfg.s * si.beta / si.K)


def ps_from_functionals(cfg: NetworkConfig, mix: DuplexMix, si: SelfInterferenceModel,
                        mode: SuccessMode, H: float, F: float) -> float:
    """
    Success probability from precomputed H and F.

    Parameters
    ----------
    mode : SuccessMode
        HD, FD (conditioned on the typical link state) or UNCONDITIONAL.
    H, F : float
        Functionals at s = theta R^alpha.
    """
    hd = math.exp(-cfg.lam * (mix.p1 * H + mix.p2 * F))
    if mode is SuccessMode.HD:
        return hd
    k = kappa(cfg, si)
    if mode is SuccessMode.FD:
        return k * hd
    # silent links never succeed
    return (mix.p1 + k * mix.p2) * hd


def _functionals(cfg: NetworkConfig, mix: DuplexMix, rel_tol: float) -> tuple[float, float]:
    H = spectral_H(cfg.s, cfg.alpha)
    F = pair_F(cfg.s, cfg.alpha, cfg.R, rel_tol) if mix.p2 > 0 else 0.0
    return H, F


def ps_hd(cfg: NetworkConfig, mix: DuplexMix, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """
    Success probability conditioned on an HD typical link:
    exp(-lambda p1 H(theta R^alpha)) exp(-lambda p2 F(theta R^alpha, alpha, R)).
    """
    H, F = _functionals(cfg, mix, rel_tol)
    return ps_from_functionals(cfg, mix, SelfInterferenceModel.perfect(), SuccessMode.HD, H, F)


def ps_fd(cfg: NetworkConfig, mix: DuplexMix, si: SelfInterferenceModel,
          rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Success probability conditioned on an FD typical link: kappa * ps_hd."""
    return kappa(cfg, si) * ps_hd(cfg, mix, rel_tol)


def ps_unconditional(cfg: NetworkConfig, mix: DuplexMix, si: SelfInterferenceModel,
                     rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Unconditional success probability p1 ps_hd + p2 ps_fd = (p1 + kappa p2) ps_hd."""
    if mix.active == 0:
        return 0.0
    H, F = _functionals(cfg, mix, rel_tol)
    return ps_from_functionals(cfg, mix, si, SuccessMode.UNCONDITIONAL, H, F)


def success_probability(cfg: NetworkConfig, mix: DuplexMix, si: SelfInterferenceModel,
                        mode: SuccessMode, rel_tol: float = DEFAULT_REL_TOL) -> float:
    if mode is SuccessMode.HD:
        return ps_hd(cfg, mix, rel_tol)
    if mode is SuccessMode.FD:
        return ps_fd(cfg, mix, si, rel_tol)
    return ps_unconditional(cfg, mix, si, rel_tol)


def ps_hd_only(cfg: NetworkConfig) -> float:
    """HD-only network (p1 = 1): exp(-lambda H)."""
    return math.exp(-cfg.lam * spectral_H(cfg.s, cfg.alpha))


def ps_fd_only(cfg: NetworkConfig, si: SelfInterferenceModel, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """FD-only network (p2 = 1): kappa exp(-lambda F)."""
    return kappa(cfg, si) * math.exp(-cfg.lam * pair_F(cfg.s, cfg.alpha, cfg.R, rel_tol))


def ps_bounds(cfg: NetworkConfig, mix: DuplexMix, si: SelfInterferenceModel,
              which: SuccessMode = SuccessMode.HD, with_exact: bool = True,
              rel_tol: float = DEFAULT_REL_TOL) -> SuccessBounds:
    """
    Closed-form lower and upper bounds of a success probability.

    lower = exp(-lambda (p1 + 2 p2) H), upper = exp(-lambda (p1 + p2 (1 + delta)) H);
    the FD variant scales both by kappa, the unconditional one by (p1 + kappa p2).

    Parameters
    ----------
    which : SuccessMode
        Which probability is bounded.
    with_exact : bool
        Also evaluate the exact value through the F integral.

    Returns
    -------
    SuccessBounds
    """
    H = spectral_H(cfg.s, cfg.alpha)
    delta = cfg.delta
    lower = math.exp(-cfg.lam * (mix.p1 + 2.0 * mix.p2) * H)
    upper = math.exp(-cfg.lam * (mix.p1 + mix.p2 * (1.0 + delta)) * H)
    if which is SuccessMode.HD:
        scale = 1.0
    elif which is SuccessMode.FD:
        scale = kappa(cfg, si)
    else:
        scale = mix.p1 + kappa(cfg, si) * mix.p2
    exact = success_probability(cfg, mix, si, which, rel_tol) if with_exact else None
    return SuccessBounds(lower=scale * lower, exact=exact, upper=scale * upper)


def equal_distance_laplace(s: float, alpha: float, lam2: float) -> float:
    """
    Laplace transform of FD-pair interference when both ends of every pair sit at the
    same distance from the receiver: exp(-pi lam2 E[(h1 + h2)^delta] Gamma(1 - delta) s^delta),
    with h1 + h2 Erlang(2) so that E[(h1 + h2)^delta] = Gamma(2 + delta).
    """
    delta = _check_alpha(alpha)
    erlang_moment = special.gamma(2.0 + delta)
    return math.exp(-math.pi * lam2 * erlang_moment * special.gamma(1.0 - delta) * s ** delta)


def gap_closed_form(mix: DuplexMix, alpha: float) -> float:
    """
    Constant horizontal gap between the upper and lower bound curves:
    G = ((p1 + 2 p2) / (p1 + p2 (1 + delta)))^(1 / delta).
    """
    delta = _check_alpha(alpha)
    if mix.active == 0:
        _reject(DomainError, "horizontal gap undefined without active links (p1 = p2 = 0)")
    return ((mix.p1 + 2.0 * mix.p2) / (mix.p1 + mix.p2 * (1.0 + delta))) ** (1.0 / delta)


def sir_inverse(curve: SuccessCurve, p: float, bracket: tuple[float, float] = DEFAULT_BRACKET,
                xtol: float = INVERSION_XTOL) -> float:
    """
    Invert a strictly decreasing success-probability curve: the theta with curve(theta) = p.

    Bisection runs on log(theta); the bracket is widened by factors of two, up to
    INVERSION_MAX_EXPANSIONS times on each side, until it straddles p.

    Raises
    ------
    InversionError
        If p is not in (0, 1) or no straddling bracket is found.
    """
    if not (0.0 < p < 1.0):
        _reject(InversionError, f"target success probability must be in (0, 1), got {p}")
    lo, hi = bracket
    if not (0 < lo < hi):
        _reject(InversionError, f"invalid bracket {bracket}")

    for _ in range(INVERSION_MAX_EXPANSIONS):
        if curve(lo) > p:
            break
        lo /= 2.0
    for _ in range(INVERSION_MAX_EXPANSIONS):
        if curve(hi) < p:
            break
        hi *= 2.0
    f_lo, f_hi = curve(lo) - p, curve(hi) - p
    if not (f_lo > 0 > f_hi):
        _reject(InversionError, f"bracket [{lo:.3g}, {hi:.3g}] does not straddle p={p} "
                                f"(values {f_lo + p:.6g}, {f_hi + p:.6g})")

    root, info = optimize.bisect(lambda t: curve(math.exp(t)) - p, math.log(lo), math.log(hi),
                                 xtol=xtol, maxiter=200, full_output=True, disp=False)
    if not info.converged:
        _reject(InversionError, f"bisection did not converge for p={p}: {info.flag}")
    return math.exp(root)


def gap_numeric(curve1: SuccessCurve, curve2: SuccessCurve, p: float,
                bracket: tuple[float, float] = DEFAULT_BRACKET) -> float:
    """Horizontal gap G(p) = curve1^-1(p) / curve2^-1(p)."""
    return sir_inverse(curve1, p, bracket) / sir_inverse(curve2, p, bracket)


def success_curve(cfg: NetworkConfig, mix: DuplexMix, si: SelfInterferenceModel,
                  mode: SuccessMode, rel_tol: float = DEFAULT_REL_TOL) -> SuccessCurve:
    """theta -> exact success probability, every other parameter held fixed."""
    return lambda theta: success_probability(cfg.with_theta(theta), mix, si, mode, rel_tol)


def bound_curve(cfg: NetworkConfig, mix: DuplexMix, si: SelfInterferenceModel,
                mode: SuccessMode, side: str) -> SuccessCurve:
    """theta -> lower or upper bound of the success probability."""
    if side not in ("lower", "upper"):
        _reject(ValueError, f"side must be 'lower' or 'upper', got {side!r}")

    def curve(theta: float) -> float:
        b = ps_bounds(cfg.with_theta(theta), mix, si, mode, with_exact=False)
        return getattr(b, side)
    return curve


def hd_only_curve(cfg: NetworkConfig) -> SuccessCurve:
    return lambda theta: ps_hd_only(cfg.with_theta(theta))


def fd_only_curve(cfg: NetworkConfig, si: SelfInterferenceModel, rel_tol: float = DEFAULT_REL_TOL) -> SuccessCurve:
    return lambda theta: ps_fd_only(cfg.with_theta(theta), si, rel_tol)


def sir_loss_gamma(x: float, cfg: NetworkConfig, si: SelfInterferenceModel) -> float:
    """
    gamma(x) = x^(1 - delta) R^(alpha - 2) beta sin(pi delta) / (lambda pi^2 delta K).
    """
    delta = cfg.delta
    return (x ** (1.0 - delta) * cfg.R ** (cfg.alpha - 2.0) * si.beta * math.sin(math.pi * delta)
            / (cfg.lam * math.pi ** 2 * delta * si.K))


def sir_loss_bounds(p: float, cfg: NetworkConfig, si: SelfInterferenceModel,
                    rel_tol: float = DEFAULT_REL_TOL) -> tuple[float, float]:
    """
    Bounds of the SIR loss theta_HD(p) / theta_FD(p) between HD-only and FD-only networks.

    theta_FD(p) is found by inverting the FD-only curve; cfg.theta is not used.

    Returns
    -------
    tuple[float, float]
        ((1 + delta + gamma)^(1 / delta), (2 + gamma)^(1 / delta)), linear.

    Raises
    ------
    InversionError
        If the FD-only curve cannot be inverted at p.
    """
    theta_fd = sir_inverse(fd_only_curve(cfg, si, rel_tol), p)
    gamma = sir_loss_gamma(theta_fd, cfg, si)
    delta = cfg.delta
    logger.debug(f"sir_loss_bounds: p={p} theta_FD={theta_fd:.6g} gamma={gamma:.6g}")
    return (1.0 + delta + gamma) ** (1.0 / delta), (2.0 + gamma) ** (1.0 / delta)


def functional_ratio(theta: float, alpha: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """F / H at s = theta R^alpha; independent of R."""
    return pair_F(theta, alpha, 1.0, rel_tol) / spectral_H(theta, alpha)
