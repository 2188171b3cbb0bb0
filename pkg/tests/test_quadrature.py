import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from susydos.quadrature import (
    NonFiniteIntegrandError,
    ScaledIntegrand,
    circle_rule,
    composite_gauss_legendre,
    gauss_jacobi,
    gauss_legendre,
    half_line_rule,
    integrate,
    log_sum,
)


def test_gauss_legendre_small_orders():
    r1 = gauss_legendre(1)
    assert r1.nodes[0] == pytest.approx(0.0, abs=1e-15)
    assert r1.weights[0] == pytest.approx(2.0)
    r2 = gauss_legendre(2)
    assert np.sort(r2.nodes) == pytest.approx([-1 / math.sqrt(3), 1 / math.sqrt(3)], abs=1e-15)
    assert r2.weights == pytest.approx([1.0, 1.0])


def test_gauss_legendre_degree_five_exactness():
    rule = gauss_legendre(3)
    assert abs(np.sum(rule.weights * rule.nodes ** 4) - 0.4) < 1e-14


@pytest.mark.parametrize("order", [0, 4097])
def test_gauss_legendre_range(order):
    with pytest.raises(ValueError):
        gauss_legendre(order)


@given(st.integers(1, 40))
def test_gauss_legendre_polynomial_exactness(order):
    rule = gauss_legendre(order)
    for degree in (0, 2 * order - 2, 2 * order - 1):
        exact = 0.0 if degree % 2 else 2.0 / (degree + 1)
        assert abs(np.sum(rule.weights * rule.nodes ** degree) - exact) < 1e-13


def test_rules_are_immutable():
    rule = gauss_legendre(4)
    with pytest.raises(ValueError):
        rule.nodes[0] = 1.0


def test_circle_weights_sum_to_zero():
    for radius, n in [(1.0, 64), (2.5, 100), (0.3, 7)]:
        rule = circle_rule(radius, n)
        assert abs(np.sum(rule.weights)) < 1e-14 * n * radius


def test_circle_cauchy_examples():
    rule = circle_rule(1.0, 64)
    assert abs(integrate(rule, lambda z: -np.log(z)).value - 2j * math.pi) < 1e-13
    assert abs(integrate(rule, lambda z: 3 * np.log(z)).value) < 1e-13
    N = 7
    res = integrate(rule, lambda z: N * np.log(z) - (N + 1) * np.log(z))
    assert abs(res.value - 2j * math.pi) < 1e-13


def test_circle_rejects_bad_input():
    with pytest.raises(ValueError):
        circle_rule(0.0, 16)
    with pytest.raises(ValueError):
        circle_rule(1.0, 3)


def test_circle_doubling_past_knee():
    f = lambda z: np.log(np.exp(z) / z ** 3)  # noqa: E731
    a = integrate(circle_rule(1.0, 64), f).value
    b = integrate(circle_rule(1.0, 128), f).value
    assert abs(a - b) < 1e-12
    assert abs(a - 2j * math.pi / 2) < 1e-12


def test_constant_on_interval():
    assert integrate(gauss_legendre(5), lambda x: np.zeros_like(x, dtype=complex)).value == pytest.approx(2.0)


def test_large_log_magnitude_is_transparent():
    rule = circle_rule(1.0, 64)
    res = integrate(rule, lambda z: 1e4 - np.log(z))
    assert res.log_scale == pytest.approx(1e4)
    assert abs(res.mantissa - 2j * math.pi) < 1e-12
    scaled = res.scaled()
    assert scaled.log_magnitude == pytest.approx(1e4 + math.log(2 * math.pi))
    assert abs(scaled.phase - 1j) < 1e-14


def test_gaussian_half_line():
    rule = composite_gauss_legendre(0.0, 12.0, 12, 16)
    assert abs(integrate(rule, lambda s: -s * s + 0j).value - math.sqrt(math.pi) / 2) < 1e-10
    res = integrate(half_line_rule(200, 2.0), lambda s: -s * s + 0j)
    assert abs(res.value - math.sqrt(math.pi) / 2) < 1e-10


def test_error_estimate_shrinks():
    f = lambda x: np.log(np.cos(3 * x) + 2 + 0j)  # noqa: E731
    low = integrate(composite_gauss_legendre(-1, 1, 2, 6), f)
    high = integrate(composite_gauss_legendre(-1, 1, 4, 16), f)
    assert high.error < low.error
    assert high.error < 1e-12


def test_non_finite_integrand_reports_node():
    rule = gauss_legendre(4)
    with pytest.raises(NonFiniteIntegrandError) as info:
        integrate(rule, lambda x: np.where(x > 0.5, np.nan, 0.0) + 0j)
    assert info.value.node > 0.5


def test_scaled_integrand_phase_check():
    with pytest.raises(ValueError):
        ScaledIntegrand(0.0, 1.5)
    s = ScaledIntegrand.from_complex(-3.0)
    assert s.value == pytest.approx(-3.0)
    assert (s * ScaledIntegrand.from_log(1j * math.pi)).value == pytest.approx(3.0)


def test_scaled_integrand_accepted_by_integrate():
    rule = gauss_legendre(8)
    res = integrate(rule, lambda x: ScaledIntegrand(np.zeros_like(x), np.ones_like(x, dtype=complex)))
    assert res.value == pytest.approx(2.0)


def test_log_sum_all_zero():
    assert log_sum(np.array([-np.inf, -np.inf]), np.ones(2)) == (0.0, 0j)


coeff = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=50)
@given(coeff, coeff, coeff, coeff)
def test_integrate_is_linear(a, b, c, d):
    rule = composite_gauss_legendre(-1, 1, 3, 10)
    f = lambda x: np.exp(c * x) + 0j  # noqa: E731
    g = lambda x: np.cos(d * x) + 2 + 0j  # noqa: E731
    with np.errstate(divide="ignore"):
        combo = integrate(rule, lambda x: np.log(a * f(x) + b * g(x) + 0j)).value
    parts = a * integrate(rule, lambda x: np.log(f(x))).value + b * integrate(rule, lambda x: np.log(g(x))).value
    assert abs(combo - parts) <= 1e-13 * max(1.0, abs(a) * 10 + abs(b) * 10)


@settings(max_examples=50)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_scaled_matches_naive(cs):
    rule = composite_gauss_legendre(-1, 1, 2, 12)
    vals = cs[0] + cs[1] * rule.nodes + cs[2] * rule.nodes ** 2 + 1j * np.sin(rule.nodes)
    naive = np.sum(rule.weights * vals)
    scaled = integrate(rule, lambda x: np.log(cs[0] + cs[1] * x + cs[2] * x ** 2 + 1j * np.sin(x))).value
    assert abs(naive - scaled) <= 1e-12 * max(1.0, np.sum(np.abs(rule.weights * vals)))


def test_gauss_jacobi_weight():
    rule = gauss_jacobi(10, 1.5)
    # integral of (1 - x^2)^(3/2) over [-1, 1] is 3 pi / 8
    assert np.sum(rule.weights).real == pytest.approx(3 * math.pi / 8, rel=1e-13)
    with pytest.raises(ValueError):
        gauss_jacobi(4, -1.0)
