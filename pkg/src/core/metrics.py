import math

import numpy as np
from scipy import stats
from statsmodels.stats.proportion import proportion_confint


def wilson_interval(successes: int, trials: int, confidence_level: float = 0.99) -> tuple[float, float]:
    """
    Wilson score interval of a binomial proportion.

    Parameters
    -----
    successes : int
        Number of successes.
    trials : int
        Number of trials, >= 1.
    confidence_level : float
        Two-sided coverage, e.g. 0.99.

    Returns
    -----
    tuple[float, float]
        (low, high), both in [0, 1].
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    low, high = proportion_confint(successes, trials, alpha=1.0 - confidence_level, method="wilson")
    return float(max(0.0, low)), float(min(1.0, high))


def binomial_std_error(p_hat: float, trials: int) -> float:
    return math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / trials)


def z_quantile(confidence_level: float) -> float:
    """Two-sided standard normal quantile."""
    return float(stats.norm.ppf(0.5 + confidence_level / 2.0))


def normal_interval(estimate: float, std_error: float, confidence_level: float = 0.99) -> tuple[float, float]:
    z = z_quantile(confidence_level)
    return estimate - z * std_error, estimate + z * std_error


def ci_miss_budget(points: int, confidence_level: float, quantile: float = 0.99) -> int:
    """
    Number of grid points allowed to miss their CI: the `quantile` quantile of
    Binomial(points, 1 - confidence_level).
    """
    return int(stats.binom.ppf(quantile, points, 1.0 - confidence_level))


def log_log_slope(x: np.ndarray, y: np.ndarray) -> float:
    """
    Least-squares slope of log(y) against log(x).

    Returns
    -----
    float
        Slope of the fitted line.
    """
    result = stats.linregress(np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float)))
    return float(result.slope)
