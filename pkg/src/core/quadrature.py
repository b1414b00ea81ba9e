import math
import logging
from dataclasses import dataclass
from typing import Callable, Sequence

from scipy import integrate

from .errors import QuadratureError

logger = logging.getLogger('quadrature')

DEFAULT_REL_TOL = 1e-9
DEFAULT_ABS_FLOOR = 1e-13
DEFAULT_MAX_EVALUATIONS = 1_000_000

# QUADPACK qagse uses the 21-point Kronrod rule on every subinterval
_KRONROD_POINTS = 21
# ier codes meaning "roundoff prevents the requested accuracy", accepted when the estimate is still small
_ROUNDOFF_CODES = (2, 4)
_ROUNDOFF_SLACK = 100.0


@dataclass(frozen=True)
class IntegrationResult:
    """
    Value of a definite integral with its error estimate.

    Attributes:
    value (float): The integral.
    abs_error_estimate (float): Absolute error estimate, >= 0.
    evaluations (int): Integrand evaluations spent, >= 1.
    """
    value: float
    abs_error_estimate: float
    evaluations: int


def _subinterval_limit(max_evaluations: int) -> int:
    # each bisection costs two 21-point rules
    return max(1, (max_evaluations // _KRONROD_POINTS + 1) // 2)


def _run_quad(f: Callable[[float], float], a: float, b: float, rel_tol: float,
              abs_floor: float, max_evaluations: int, breakpoints: Sequence[float] | None,
              label: str) -> IntegrationResult:
    if rel_tol <= 0:
        message = f"rel_tol must be positive, got {rel_tol}"
        logger.error(message)
        raise ValueError(message)
    points = None
    if breakpoints:
        points = sorted({p for p in breakpoints if a < p < b}) or None

    out = integrate.quad(
        f, a, b,
        epsabs=abs_floor,
        epsrel=rel_tol,
        limit=_subinterval_limit(max_evaluations),
        points=points,
        full_output=1,
    )
    value, abserr, info = out[0], out[1], out[2]
    evaluations = int(info.get("neval", 1)) if isinstance(info, dict) else 1
    ier = 0 if len(out) == 3 else _ier_from_message(out[3])

    if ier == 0:
        logger.debug(f"{label}: value={value:.15g} err={abserr:.3g} neval={evaluations}")
        return IntegrationResult(value, abs(abserr), max(1, evaluations))

    tolerance = max(rel_tol * abs(value), abs_floor)
    if ier in _ROUNDOFF_CODES and abserr <= _ROUNDOFF_SLACK * tolerance:
        logger.warning(f"{label}: roundoff flag raised, accepting err={abserr:.3g} (tolerance {tolerance:.3g})")
        return IntegrationResult(value, abs(abserr), max(1, evaluations))

    message = f"{label} failed to converge on [{a}, {b}]: {out[3]!s} (value={value}, err={abserr}, neval={evaluations})"
    logger.error(message)
    raise QuadratureError(message, value, abs(abserr), evaluations)


def _ier_from_message(message: str) -> int:
    # quad only returns the message tuple member when ier > 0
    text = str(message).lower()
    if "roundoff" in text:
        return 2
    if "diverg" in text:
        return 5
    return 1


def integrate_finite(f: Callable[[float], float], a: float, b: float,
                     rel_tol: float = DEFAULT_REL_TOL,
                     abs_floor: float = DEFAULT_ABS_FLOOR,
                     max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
                     breakpoints: Sequence[float] | None = None) -> IntegrationResult:
    """
    Integrate f over the finite interval [a, b] by adaptive Gauss-Kronrod subdivision.

    Parameters
    ----------
    f : callable
        Integrand, bounded on [a, b].
    a, b : float
        Finite bounds with a <= b.
    rel_tol : float
        Requested relative accuracy; the absolute target is max(rel_tol * |value|, abs_floor).
    max_evaluations : int
        Hard cap on integrand evaluations.
    breakpoints : sequence of float, optional
        Interior points where the integrand has a knee or a peak.

    Returns
    -------
    IntegrationResult

    Raises
    ------
    QuadratureError
        If the budget is exhausted before the tolerance is met.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        message = f"integrate_finite needs finite bounds, got [{a}, {b}]"
        logger.error(message)
        raise ValueError(message)
    if a > b:
        message = f"integrate_finite needs a <= b, got [{a}, {b}]"
        logger.error(message)
        raise ValueError(message)
    if a == b:
        return IntegrationResult(0.0, 0.0, 1)
    return _run_quad(f, a, b, rel_tol, abs_floor, max_evaluations, breakpoints, "integrate_finite")


def semi_infinite_map(u: float, a: float = 0.0) -> tuple[float, float]:
    """
    Map u in [0, 1) to r = a + u / (1 - u) in [a, inf).

    Returns
    -------
    tuple[float, float]
        (r, dr/du).
    """
    w = 1.0 - u
    return a + u / w, 1.0 / (w * w)


def semi_infinite_inverse(r: float, a: float = 0.0) -> float:
    """Inverse of semi_infinite_map: u = (r - a) / (1 + r - a)."""
    x = r - a
    return x / (1.0 + x)


def integrate_semi_infinite(f: Callable[[float], float], a: float = 0.0,
                            rel_tol: float = DEFAULT_REL_TOL,
                            abs_floor: float = DEFAULT_ABS_FLOOR,
                            max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
                            breakpoints: Sequence[float] | None = None) -> IntegrationResult:
    """
    Integrate f over [a, inf) through the substitution u = (r - a) / (1 + r - a).

    The transformed integrand f(r(u)) / (1 - u)^2 lives on [0, 1) and is evaluated
    by the same adaptive rule as integrate_finite. Gauss-Kronrod nodes never touch
    u = 1, so the endpoint itself is not evaluated.

    Parameters
    ----------
    f : callable
        Integrand on [a, inf); callers guarantee a tail decaying faster than r^-1.
    breakpoints : sequence of float, optional
        Knees of f given in the original variable r.

    Raises
    ------
    QuadratureError
        If the transformed integral does not converge, which is how a divergent
        tail shows up.
    """
    if not math.isfinite(a):
        message = f"integrate_semi_infinite needs a finite lower bound, got {a}"
        logger.error(message)
        raise ValueError(message)

    def mapped(u: float) -> float:
        r, jac = semi_infinite_map(u, a)
        if not math.isfinite(r):
            return 0.0
        return f(r) * jac

    u_points = None
    if breakpoints:
        u_points = [semi_infinite_inverse(r, a) for r in breakpoints if r > a]
    result = _run_quad(mapped, 0.0, 1.0, rel_tol, abs_floor, max_evaluations, u_points,
                       "integrate_semi_infinite")
    if not math.isfinite(result.value):
        message = f"integrate_semi_infinite: non-finite value on [{a}, inf), the tail diverges"
        logger.error(message)
        raise QuadratureError(message, result.value, result.abs_error_estimate, result.evaluations)
    return result
