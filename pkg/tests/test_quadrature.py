import math

import numpy as np
import pytest
from scipy import integrate

from src.core.errors import QuadratureError
from src.core.quadrature import (
    integrate_finite,
    integrate_semi_infinite,
    semi_infinite_inverse,
    semi_infinite_map,
)


def test_polynomial_on_unit_interval():
    '''
    The integral of x^2 over [0, 1] is 1/3.
    '''
    res = integrate_finite(lambda x: x * x, 0.0, 1.0)
    assert res.value == pytest.approx(1.0 / 3.0, rel=1e-12)
    assert res.abs_error_estimate >= 0
    assert res.evaluations >= 1


def test_exponential_tail():
    '''
    The integral of exp(-x) over [0, inf) is 1.
    '''
    res = integrate_semi_infinite(lambda x: math.exp(-x), 0.0)
    assert abs(res.value - 1.0) <= 1e-9


def test_power_tail_from_one():
    '''
    The integral of x^-3 over [1, inf) is 1/2.
    '''
    res = integrate_semi_infinite(lambda x: x ** -3, 1.0)
    assert res.value == pytest.approx(0.5, rel=1e-9)


@pytest.mark.parametrize("c", [-1.0, 10.0, 0.5, 3.0])
def test_linearity(c):
    '''
    Scaling the integrand scales the result.
    '''
    base = integrate_semi_infinite(lambda x: math.exp(-x) / (1.0 + x), 0.0).value
    scaled = integrate_semi_infinite(lambda x: c * math.exp(-x) / (1.0 + x), 0.0).value
    assert scaled == pytest.approx(c * base, rel=2e-9)


def test_breakpoint_at_a_kink():
    '''
    |x - 0.3| over [0, 1] with a breakpoint on the kink.
    '''
    res = integrate_finite(lambda x: abs(x - 0.3), 0.0, 1.0, breakpoints=[0.3])
    assert res.value == pytest.approx(0.29, rel=1e-12)


def test_empty_interval():
    assert integrate_finite(math.exp, 2.0, 2.0).value == 0.0


def test_reversed_bounds_rejected():
    with pytest.raises(ValueError):
        integrate_finite(math.exp, 1.0, 0.0)


def test_divergent_tail_raises():
    '''
    1/x has no finite integral over [1, inf).
    '''
    with pytest.raises(QuadratureError):
        integrate_semi_infinite(lambda x: 1.0 / x, 1.0)


def test_evaluation_budget_exhausted():
    '''
    A single 21-point rule cannot resolve a fast oscillation; the error carries the partial result.
    '''
    with pytest.raises(QuadratureError) as info:
        integrate_finite(lambda x: math.sin(200.0 * x) ** 2, 0.0, 10.0, max_evaluations=21)
    assert info.value.evaluations >= 1
    assert math.isfinite(info.value.value)


@pytest.mark.parametrize("offset", [0.0, 0.25, 1.0, 7.5, 1e6])
def test_semi_infinite_map_inverse(offset):
    '''
    u = (r - a) / (1 + r - a) maps [a, inf) onto [0, 1) and back.
    '''
    a = 0.5
    u = semi_infinite_inverse(a + offset, a)
    back, jac = semi_infinite_map(u, a)
    assert 0.0 <= u < 1.0
    assert back == pytest.approx(a + offset, rel=1e-9)
    assert jac >= 1.0


def test_periodic_closed_form_and_error_estimate():
    '''
    The integral of 1 / (1 + cos(phi) / 2) over [0, 2 pi] is 4 pi / sqrt(3); the reported
    estimate bounds the true error.
    '''
    exact = 4.0 * math.pi / math.sqrt(3.0)
    res = integrate_finite(lambda phi: 1.0 / (1.0 + 0.5 * math.cos(phi)), 0.0, 2.0 * math.pi)
    assert res.value == pytest.approx(exact, rel=1e-9)
    assert abs(res.value - exact) <= res.abs_error_estimate + 4 * np.finfo(float).eps * exact


def test_rational_tail_closed_form():
    '''
    The integral of x / (1 + x^4) over [0, inf) is pi / 4.
    '''
    exact = math.pi / 4.0
    res = integrate_semi_infinite(lambda x: x / (1.0 + x ** 4), 0.0)
    assert res.value == pytest.approx(exact, rel=1e-9)
    assert abs(res.value - exact) <= res.abs_error_estimate + 4 * np.finfo(float).eps * exact


def test_dense_trapezoid_oracle():
    '''
    1 / (1 + (2 + 2 cos(phi))^-2) over [0, 2 pi] against a 10^6-point trapezoid sum,
    which is spectrally accurate for a smooth periodic integrand.
    '''
    phi = np.linspace(0.0, 2.0 * math.pi, 1_000_001)
    d = 2.0 + 2.0 * np.cos(phi)
    oracle = integrate.trapezoid(d * d / (d * d + 1.0), phi)

    def f(x):
        g = 2.0 + 2.0 * math.cos(x)
        return g * g / (g * g + 1.0)

    res = integrate_finite(f, 0.0, 2.0 * math.pi, breakpoints=[math.pi])
    assert res.value == pytest.approx(oracle, rel=1e-9)


@pytest.mark.parametrize("f, a, c, b", [
    (lambda x: 1.0 / (1.0 + x * x), 0.0, 1.0, 3.0),
    (lambda x: math.exp(-x) * math.sin(3.0 * x), 0.0, 0.7, 5.0),
    (lambda x: abs(x - 0.3), 0.0, 0.3, 1.0),
])
def test_interval_additivity(f, a, c, b):
    '''
    The integral over [a, b] equals the sum over [a, c] and [c, b] within the combined estimates.
    '''
    whole = integrate_finite(f, a, b, breakpoints=[c])
    left = integrate_finite(f, a, c)
    right = integrate_finite(f, c, b)
    slack = whole.abs_error_estimate + left.abs_error_estimate + right.abs_error_estimate
    assert abs(whole.value - (left.value + right.value)) <= slack + 1e-15
