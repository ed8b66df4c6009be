import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levyfpe.finite_diff import fd_derivative, fornberg_weights
from levyfpe.testfunctions import bump, cosine, custom, gaussian, poly_gaussian

mp.mp.dps = 50


def _mp_bump(x, c=0.0, r=1.0):
    u = (x - c) / r
    return mp.e ** (-1 / (1 - u**2)) if abs(u) < 1 else mp.mpf(0)


def _mp_deriv(f, x, k):
    return mp.diff(f, mp.mpf(x), k)


# ---------------------------------------------------------------- examples
def test_bump_value_at_centre():
    assert bump(0, 1)(0.0) == pytest.approx(math.exp(-1), abs=1e-15)


def test_bump_derivative_vanishes_outside_support():
    assert bump(0, 1).derivative(5, 2.0) == 0.0
    assert bump(0, 1).derivative(0, 1.0) == 0.0


def test_gaussian_second_derivative_at_zero():
    assert gaussian(0, 1).derivative(2, 0.0) == pytest.approx(-2.0, abs=1e-15)


def test_cosine_odd_derivative_at_zero():
    assert cosine(2.0).derivative(3, 0.0) == 0.0


def test_negative_order_rejected():
    with pytest.raises(ValueError):
        gaussian().derivative(-1, 0.0)


# ---------------------------------------------------------- mpmath oracles
@pytest.mark.parametrize("x", [-0.7, -0.2, 0.0, 0.35, 0.8])
@pytest.mark.parametrize("k", [0, 1, 2, 5, 8, 12])
def test_bump_matches_mpmath(x, k):
    ref = float(_mp_deriv(_mp_bump, x, k))
    got = bump(0, 1).derivative(k, x)
    assert got == pytest.approx(ref, rel=1e-11, abs=1e-13 * max(1.0, abs(ref)))


@pytest.mark.parametrize("x", [-2.5, -0.4, 0.0, 1.1, 3.0])
@pytest.mark.parametrize("k", [0, 1, 3, 7, 12, 20])
def test_gaussian_matches_mpmath(x, k):
    a, b = 0.5, 2.0
    ref = float(_mp_deriv(lambda u: mp.e ** (-((u - a) ** 2) / b), x, k))
    got = gaussian(a, b).derivative(k, x)
    assert got == pytest.approx(ref, rel=1e-12, abs=1e-14 * max(1.0, abs(ref)))


@pytest.mark.parametrize("omega", [-3.0, -1.0, 0.5, 2.0])
@pytest.mark.parametrize("k", [0, 1, 2, 3, 4, 9])
def test_cosine_matches_closed_form(omega, k):
    x = 0.37
    ref = omega**k * math.cos(omega * x + k * math.pi / 2)
    assert cosine(omega).derivative(k, x) == pytest.approx(ref, rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("k", [0, 1, 4, 10])
def test_poly_gaussian_matches_mpmath(k):
    coeffs, a, b = (1.0, -2.0, 0.5), 0.3, 1.5
    f = lambda u: (coeffs[0] + coeffs[1] * u + coeffs[2] * u**2) * mp.e ** (-((u - a) ** 2) / b)
    for x in (-1.2, 0.0, 0.9):
        ref = float(_mp_deriv(f, x, k))
        got = poly_gaussian(coeffs, a, b).derivative(k, x)
        assert got == pytest.approx(ref, rel=1e-11, abs=1e-13 * max(1.0, abs(ref)))


def test_high_order_bump_taylor_coefficients_match_mpmath():
    x, K = 0.4, 60
    ref = mp.taylor(_mp_bump, mp.mpf(x), K)
    got = bump(0, 1).taylor_coefficients(x, K)
    for k in (20, 40, 60):
        assert got[k] == pytest.approx(float(ref[k]), rel=1e-10)


def test_scaled_taylor_consistent_with_derivative():
    phi = gaussian(0, 1)
    c_hat, log_rho = phi.scaled_taylor(np.float64(0.8), 10)
    for k in range(11):
        assert c_hat[k] * math.exp(-k * log_rho) * math.factorial(k) == pytest.approx(
            phi.derivative(k, 0.8), rel=1e-12, abs=1e-15)


# ---------------------------------------------------------------- finite differences
@pytest.mark.parametrize("phi", [gaussian(0, 1), cosine(1.5), bump(0.2, 0.9)], ids=str)
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_analytic_derivatives_agree_with_finite_differences(phi, k):
    x = 0.15
    fd = fd_derivative(phi, k, x)
    assert phi.derivative(k, x) == pytest.approx(fd, rel=1e-5, abs=1e-6)


def test_fornberg_weights_second_derivative():
    w = fornberg_weights(2, [-1, 0, 1])
    assert np.allclose(w, [1, -2, 1])


def test_custom_family_uses_supplied_derivative_and_caps_fd_order():
    phi = custom(np.sin, derivative=lambda k, x: np.sin(x + k * np.pi / 2))
    assert phi.derivative(5, 0.3) == pytest.approx(math.sin(0.3 + 5 * math.pi / 2), rel=1e-15)
    plain = custom(np.sin)
    assert plain.derivative(2, 0.3) == pytest.approx(-math.sin(0.3), rel=1e-6)
    with pytest.raises(ValueError):
        plain.derivative(7, 0.3)


# ---------------------------------------------------------------- properties
@settings(max_examples=60, deadline=None)
@given(x=st.floats(-5, 5), k=st.integers(0, 30), omega=st.floats(0.1, 4))
def test_cosine_derivative_bounded_by_omega_power(x, k, omega):
    assert abs(cosine(omega).derivative(k, x)) <= omega**k * (1 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(u=st.floats(1.0, 10.0), k=st.integers(0, 25))
def test_bump_derivatives_vanish_outside_support(u, k):
    assert bump(0, 1).derivative(k, u) == 0.0
    assert bump(0, 1).derivative(k, -u) == 0.0


@settings(max_examples=40, deadline=None)
@given(x=st.floats(-3, 3), k=st.integers(0, 20))
def test_gaussian_parity(x, k):
    phi = gaussian(0, 1)
    assert phi.derivative(k, -x) == pytest.approx((-1) ** k * phi.derivative(k, x),
                                                  rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("phi,lo,hi", [
    (gaussian(0, 1), -3.0, 3.0),
    (gaussian(1, 2), -3.0, 5.0),
    (cosine(2.0), -3.0, 3.0),
    (bump(0, 1), -0.9, 0.9),
    (poly_gaussian((1.0, 0.5, -0.25), 0.0, 1.0), -3.0, 3.0),
], ids=["gauss01", "gauss12", "cos2", "bump", "polygauss"])
def test_derivative_is_fd_of_previous_order(phi, lo, hi):
    rng = np.random.default_rng(7)
    xs = rng.uniform(lo, hi, 50)
    grid = np.linspace(lo, hi, 2001)
    for k in range(1, 13):
        scale = np.max(np.abs(phi.derivative(k, grid)))
        fd = fd_derivative(lambda u: phi.derivative(k - 1, u), 1, xs, h=1e-3, half_width=6)
        assert np.max(np.abs(phi.derivative(k, xs) - fd)) <= 1e-6 * scale, k
