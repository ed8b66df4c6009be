"""Test functions with exact derivatives of arbitrary order.

Every built-in family exposes its Taylor coefficients in a scaled form::

    phi^(k)(x) / k! == c_hat[k] / rho**k

with ``c_hat`` bounded and ``rho`` a natural length scale of the family (the
distance to the nearest complex singularity for the bump, ``sqrt(b/2)`` for
the Gaussian, ``1/omega`` for the cosine). Series code works with ``c_hat``
and ``log(rho)`` so that no factorial or power is ever formed explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln

from .finite_diff import fd_derivative

__all__ = [
    "TestFunction",
    "bump",
    "gaussian",
    "cosine",
    "poly_gaussian",
    "custom",
    "tf_derivative",
    "CUSTOM_MAX_ORDER",
]

CUSTOM_MAX_ORDER = 6
FAMILIES = ("bump", "gaussian", "cosine", "poly_gaussian", "custom")


@dataclass(frozen=True)
class TestFunction:
    """A test function ``phi`` from one of the supported families.

    Use the module-level constructors (:func:`bump`, :func:`gaussian`, ...)
    rather than instantiating directly.
    """

    __test__ = False  # keep pytest from collecting this class

    family: str
    params: tuple = ()
    fn: Optional[Callable] = field(default=None, compare=False)
    deriv: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown test-function family {self.family!r}")
        if self.family == "bump" and not self.params[1] > 0:
            raise ValueError("bump radius must be positive")
        if self.family in ("gaussian", "poly_gaussian") and not self.params[-1] > 0:
            raise ValueError("gaussian width parameter b must be positive")
        if self.family == "custom" and self.fn is None:
            raise ValueError("custom test function needs a callable")

    @property
    def builtin(self) -> bool:
        return self.family != "custom"

    # ------------------------------------------------------------------ values
    def __call__(self, x):
        return self.derivative(0, x)

    def derivative(self, k: int, x):
        """Exact ``k``-th derivative at ``x`` (scalar or array)."""
        k = int(k)
        if k < 0:
            raise ValueError("derivative order must be non-negative")
        x = np.asarray(x, dtype=float)
        if self.family == "custom":
            return self._custom_derivative(k, x)
        if self.family == "cosine":
            (omega,) = self.params
            return _as_output(omega**k * _cos_phase(omega * x, k))
        if self.family == "bump" and k == 0:
            return _as_output(_bump_value(x, *self.params))
        if self.family == "gaussian" and k == 0:
            a, b = self.params
            return _as_output(np.exp(-((x - a) ** 2) / b))
        c_hat, log_rho = self.scaled_taylor(x, k)
        with np.errstate(over="ignore", invalid="ignore"):
            scale = np.exp(gammaln(k + 1) - k * log_rho)
            out = np.where(c_hat[k] == 0.0, 0.0, c_hat[k] * scale)
        return _as_output(out)

    def _custom_derivative(self, k, x):
        if k > CUSTOM_MAX_ORDER:
            raise ValueError(
                f"custom test functions serve derivatives up to order "
                f"{CUSTOM_MAX_ORDER}; got {k}"
            )
        if k == 0:
            return _as_output(np.asarray(self.fn(x), dtype=float))
        if self.deriv is not None:
            return _as_output(np.asarray(self.deriv(k, x), dtype=float))
        return _as_output(fd_derivative(self.fn, k, x))

    # -------------------------------------------------------- Taylor machinery
    def scaled_taylor(self, x, K: int):
        """Scaled Taylor coefficients at ``x`` up to order ``K``.

        Returns ``(c_hat, log_rho)`` with ``c_hat`` of shape ``(K+1,) + x.shape``
        such that ``phi^(k)(x)/k! = c_hat[k] * exp(-k*log_rho)``.
        """
        x = np.asarray(x, dtype=float)
        K = int(K)
        if self.family == "custom":
            raise ValueError("Taylor coefficients need a built-in family")
        if self.family == "gaussian":
            return _gaussian_taylor(x, K, *self.params)
        if self.family == "cosine":
            return _cosine_taylor(x, K, self.params[0])
        if self.family == "bump":
            return _bump_taylor(x, K, *self.params)
        coeffs, a, b = self.params
        return _poly_gaussian_taylor(x, K, np.asarray(coeffs, dtype=float), a, b)

    def taylor_coefficients(self, x, K: int):
        """Unscaled ``phi^(k)(x)/k!`` for ``k = 0..K`` (may overflow for large K)."""
        c_hat, log_rho = self.scaled_taylor(x, K)
        k = np.arange(K + 1).reshape((-1,) + (1,) * np.ndim(x))
        with np.errstate(over="ignore", invalid="ignore"):
            return np.where(c_hat == 0.0, 0.0, c_hat * np.exp(-k * log_rho))

    def support(self):
        """``(lo, hi)`` outside of which the function and its derivatives vanish."""
        if self.family == "bump":
            c, r = self.params
            return c - r, c + r
        return -math.inf, math.inf


# ---------------------------------------------------------------- constructors
def bump(center: float = 0.0, radius: float = 1.0) -> TestFunction:
    """``exp(-1/(1-u^2))`` with ``u = (x-center)/radius`` on ``|u|<1``, else 0."""
    return TestFunction("bump", (float(center), float(radius)))


def gaussian(a: float = 0.0, b: float = 1.0) -> TestFunction:
    """``exp(-(x-a)^2/b)``."""
    return TestFunction("gaussian", (float(a), float(b)))


def cosine(omega: float) -> TestFunction:
    return TestFunction("cosine", (float(omega),))


def poly_gaussian(coeffs, a: float = 0.0, b: float = 1.0) -> TestFunction:
    """``P(x) exp(-(x-a)^2/b)`` with ``P`` given by ascending coefficients."""
    return TestFunction("poly_gaussian", (tuple(float(c) for c in coeffs), float(a), float(b)))


def custom(fn: Callable, derivative: Optional[Callable] = None) -> TestFunction:
    """Wrap an arbitrary vectorised callable.

    ``derivative(k, x)`` may supply exact derivatives; otherwise central finite
    differences are used. Either way orders above 6 are refused.
    """
    return TestFunction("custom", (), fn=fn, deriv=derivative)


def tf_derivative(phi: TestFunction, k: int, x):
    return phi.derivative(k, x)


# ------------------------------------------------------------------- internals
def _as_output(a):
    a = np.asarray(a, dtype=float)
    return float(a) if a.ndim == 0 else a


def _cos_phase(theta, k):
    # d^k/dx^k cos = cos(theta + k*pi/2); select the phase exactly
    r = k % 4
    if r == 0:
        return np.cos(theta)
    if r == 1:
        return -np.sin(theta)
    if r == 2:
        return -np.cos(theta)
    return np.sin(theta)


def _bump_value(x, center, radius):
    u = (x - center) / radius
    inside = np.abs(u) < 1.0
    uu = np.where(inside, u, 0.0)
    return np.where(inside, np.exp(-1.0 / (1.0 - uu * uu)), 0.0)


def _gaussian_taylor(x, K, a, b):
    # normalised Hermite recursion: eta_k = H_k(u) e^{-u^2} / sqrt(2^k k!)
    u = (x - a) / math.sqrt(b)
    eta = np.empty((K + 1,) + u.shape)
    eta[0] = np.exp(-u * u)
    if K >= 1:
        eta[1] = math.sqrt(2.0) * u * eta[0]
    for k in range(1, K):
        eta[k + 1] = math.sqrt(2.0 / (k + 1)) * u * eta[k] - math.sqrt(k / (k + 1)) * eta[k - 1]
    k = np.arange(K + 1).reshape((-1,) + (1,) * u.ndim)
    c_hat = (-1.0) ** k * eta * np.exp(-0.5 * gammaln(k + 1))
    return c_hat, np.full(u.shape, 0.5 * math.log(b / 2.0))


def _cosine_taylor(x, K, omega):
    c_hat = np.empty((K + 1,) + x.shape)
    sign = -1.0 if omega < 0 else 1.0
    for k in range(K + 1):
        c_hat[k] = sign**k * _cos_phase(omega * x, k) * math.exp(-gammaln(k + 1))
    if omega == 0.0:
        c_hat[1:] = 0.0
        return c_hat, np.zeros(x.shape)
    return c_hat, np.full(x.shape, -math.log(abs(omega)))


def _bump_taylor(x, K, center, radius):
    # Taylor coefficients of F = exp(g), g(u) = -1/(1-u^2), from F' = g' F:
    #   (m+1) F_{m+1} = sum_j (j+1) g_{j+1} F_{m-j}
    # scaled by rho = 1-|u| so every coefficient stays O(1).
    u = (x - center) / radius
    inside = np.abs(u) < 1.0
    uu = np.where(inside, u, 0.0)
    rho = 1.0 - np.abs(uu)
    n = np.arange(K + 2).reshape((-1,) + (1,) * u.ndim)
    with np.errstate(under="ignore"):
        g_hat = -0.5 * (
            (rho / (1.0 - uu)) ** (n + 1) + (-1.0) ** n * (rho / (1.0 + uu)) ** (n + 1)
        ) / rho
        dg = (n[1:] * g_hat[1:])  # (j+1) g_hat_{j+1}, j = 0..K
        F = np.empty((K + 1,) + u.shape)
        F[0] = np.exp(-1.0 / (1.0 - uu * uu))
        for m in range(K):
            F[m + 1] = np.einsum("j...,j...->...", dg[: m + 1], F[m::-1]) / (m + 1)
    F = np.where(inside, F, 0.0)
    log_rho = np.log(radius * rho)
    return F, log_rho


def _poly_gaussian_taylor(x, K, coeffs, a, b):
    g_hat, log_rho = _gaussian_taylor(x, K, a, b)
    rho = math.sqrt(b / 2.0)
    deg = len(coeffs) - 1
    # p_m = P^(m)(x)/m!, pre-multiplied by rho^m
    p = []
    c = coeffs
    for m in range(min(deg, K) + 1):
        p.append(np.polynomial.polynomial.polyval(x, c) * rho**m / math.factorial(m))
        c = np.polynomial.polynomial.polyder(c)
    c_hat = np.zeros_like(g_hat)
    for k in range(K + 1):
        for m in range(min(deg, k) + 1):
            c_hat[k] += p[m] * g_hat[k - m]
    return c_hat, log_rho
