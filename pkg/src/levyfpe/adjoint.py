"""Adjoint identity, forward-equation right-hand side and residual, growth bounds.

All derivatives of ``sigma^k p`` come from the Leibniz rule written in Taylor
coefficients::

    d^k(sigma^k p)/dy^k / k! = sum_{m=0..k} q_{k,m}(y) * c_{k-m}(y)

where ``q_{k,m}`` is the ``m``-th Taylor coefficient of ``sigma^k`` at ``y``
(exact for polynomial ``sigma``) and ``c_j = p^(j)(y)/j!`` comes from the
Hermite recursion of the mixture density. No factorial is formed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

from .density import JumpDiffusionDensity
from .finite_diff import fd_derivative
from .levy import Grid, LevyTriplet, SDEModel
from .quadrature import check_decayed, simpson
from .series import CONVERGED, DIVERGING, NOT_CONVERGED, SeriesEvaluation, classify_terms
from .testfunctions import CUSTOM_MAX_ORDER, TestFunction

__all__ = [
    "FPETermStack",
    "GrowthFit",
    "AdjointCheck",
    "deriv_sigma_k_p",
    "leibniz_coefficients",
    "fpe_term_stack",
    "adjoint_term_check",
    "fpe_rhs",
    "fpe_rhs_profile",
    "fpe_residual",
    "series_divergence_probe",
    "derivative_growth_fit",
]

K_LIMIT = 170
GROWTH_K_LIMIT = 25
GROWTH_SLACK = 1.02
FD_MAX_ORDER = CUSTOM_MAX_ORDER


def _sigma_taylor_rows(coeffs, y, K):
    """Yield ``q_k[m]``, the Taylor coefficients of ``sigma^k`` at ``y`` for m <= K.

    ``sigma^k`` has degree up to ``2k``, so each row is kept to order ``K``
    rather than ``k``: order ``k`` of ``sigma^(k+1)`` draws on ``q_k[k+1]``.
    """
    c = np.zeros(3)
    c[: len(coeffs)] = coeffs
    s0 = c[0] + c[1] * y + c[2] * y * y
    s1 = c[1] + 2.0 * c[2] * y
    s2 = c[2]
    q = np.zeros((K + 1,) + np.shape(y))
    q[0] = 1.0
    yield q
    for _ in range(K):
        nxt = s0 * q
        nxt[1:] += s1 * q[:-1]
        if s2 != 0.0:
            nxt[2:] += s2 * q[:-2]
        q = nxt
        yield q


def _is_poly(sigma):
    return not callable(sigma)


def leibniz_coefficients(p: JumpDiffusionDensity, sigma, y, t, K: int) -> np.ndarray:
    """``D[k] = d^k(sigma^k p)/dy^k / k!`` for ``k = 0..K``.

    ``sigma`` is either ascending polynomial coefficients (degree <= 2) or a
    callable ``sigma(y, t)``; the latter is differentiated numerically and
    limited to ``K <= 6``.
    """
    y = np.asarray(y, dtype=float)
    if K > K_LIMIT:
        raise ValueError(f"derivative order limited to {K_LIMIT}")
    if not _is_poly(sigma):
        if K > FD_MAX_ORDER:
            raise ValueError(
                f"non-polynomial sigma is only served up to order {FD_MAX_ORDER}; got {K}"
            )
        out = np.empty((K + 1,) + y.shape)
        for k in range(K + 1):
            def g(u, k=k):
                return np.asarray(sigma(u, t), dtype=float) ** k * p.pdf(u, t)
            out[k] = fd_derivative(g, k, y) / math.factorial(k)
        return out
    coeffs = np.atleast_1d(np.asarray(sigma, dtype=float))
    if len(coeffs) > 3:
        raise ValueError("polynomial sigma must have degree <= 2")
    c = p.taylor_coefficients(y, t, K)
    if not np.any(coeffs[1:]):
        # constant sigma: Leibniz collapses to sigma^k c_k
        k = np.arange(K + 1).reshape((-1,) + (1,) * y.ndim)
        return float(coeffs[0]) ** k * c
    out = np.empty((K + 1,) + y.shape)
    for k, q in enumerate(_sigma_taylor_rows(coeffs, y, K)):
        out[k] = np.einsum("m...,m...->...", q[: k + 1], c[k::-1])
    return out


def deriv_sigma_k_p(p: JumpDiffusionDensity, sigma, k: int, y, t):
    """``d^k/dy^k (sigma(y,t)^k p(y,t))`` by the general Leibniz rule."""
    if k < 0:
        raise ValueError("k must be non-negative")
    D = leibniz_coefficients(p, sigma, y, t, k)[k]
    with np.errstate(over="ignore", invalid="ignore"):
        val = D * math.exp(gammaln(k + 1))
    return float(val) if np.ndim(val) == 0 else val


# ------------------------------------------------------------------ term stack
@dataclass
class FPETermStack:
    """Per-order jump terms of the forward equation for one atom on a grid.

    ``per_k[k-1, i] = (-z)^k/k! d^k(sigma^k p)(y_i)``; ``compensation[i]`` is
    ``1{|z|<1} z d(sigma p)/dy (y_i)``.
    """

    k_max: int
    z: float
    y: np.ndarray
    per_k: np.ndarray
    compensation: np.ndarray

    def __post_init__(self):
        if self.k_max > K_LIMIT:
            raise ValueError(f"k_max limited to {K_LIMIT}")

    def partial_sum(self, K=None) -> np.ndarray:
        K = self.k_max if K is None else K
        return np.sum(self.per_k[:K], axis=0) + self.compensation


def _jump_terms(D, z, K):
    k = np.arange(1, K + 1).reshape((-1,) + (1,) * (D.ndim - 1))
    if z == 0.0:
        return np.zeros_like(D[1:K + 1])
    return (-z) ** k * D[1:K + 1]


def fpe_term_stack(p, sigma, z, grid: Grid, t, k_max: int) -> FPETermStack:
    y = grid.points
    D = leibniz_coefficients(p, sigma, y, t, k_max)
    comp = z * D[1] if abs(z) < 1.0 else np.zeros_like(y)
    return FPETermStack(k_max, float(z), y, _jump_terms(D, z, k_max), comp)


# --------------------------------------------------------------- adjoint check
@dataclass
class AdjointCheck:
    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        return abs(self.lhs - self.rhs)

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.gap))


def adjoint_term_check(k: int, z: float, sigma, p: JumpDiffusionDensity, phi: TestFunction,
                       grid: Grid, t: float) -> AdjointCheck:
    """Both sides of the order-``k`` integration-by-parts identity.

    ``lhs = int z^k/k! sigma^k phi^(k) p dy`` and
    ``rhs = int (-z)^k/k! d^k(sigma^k p) phi dy``, by composite Simpson.
    """
    if k < 1:
        raise ValueError("adjoint check needs k >= 1")
    y = grid.points
    if phi.builtin:
        phi_k = phi.taylor_coefficients(y, k)[k]
    else:
        phi_k = phi.derivative(k, y) / math.factorial(k)
    if _is_poly(sigma):
        sig = np.polynomial.polynomial.polyval(y, np.atleast_1d(np.asarray(sigma, float)))
    else:
        sig = np.asarray(sigma(y, t), dtype=float) * np.ones_like(y)
    pv = p.pdf(y, t)
    phiv = np.asarray(phi(y), dtype=float) * np.ones_like(y)
    D = leibniz_coefficients(p, sigma, y, t, k)[k]
    left = z**k * sig**k * phi_k * pv
    right = (-z) ** k * D * phiv
    check_decayed("p*phi", pv * phiv)
    check_decayed("left integrand", left)
    check_decayed("right integrand", right)
    return AdjointCheck(simpson(left, grid.h), simpson(right, grid.h))


# ------------------------------------------------------------ forward equation
@dataclass
class RHSProfile:
    y: np.ndarray
    values: np.ndarray
    drift: np.ndarray
    diffusion: np.ndarray
    jumps: np.ndarray
    verdicts: np.ndarray
    K: int

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.verdicts == CONVERGED))


def _worst(verdict_rows, shape):
    out = np.full(shape, CONVERGED, dtype=object)
    for v in verdict_rows:
        out = np.where(v == NOT_CONVERGED, NOT_CONVERGED, out)
    for v in verdict_rows:
        out = np.where(v == DIVERGING, DIVERGING, out)
    return out.astype(object)


def fpe_rhs_profile(p: JumpDiffusionDensity, model: SDEModel, triplet: LevyTriplet, grid: Grid,
                    t: float, K: int = 40, tol: float = 1e-12) -> RHSProfile:
    """Right-hand side of the forward equation, split by contribution."""
    if not 1 <= K <= K_LIMIT:
        raise ValueError(f"K must lie in [1, {K_LIMIT}]")
    y = grid.points
    sigma = model.noise_poly(t)
    if sigma is None:
        sigma = model.noise_intensity
        if K > FD_MAX_ORDER:
            raise ValueError(
                f"non-polynomial sigma is only served up to order {FD_MAX_ORDER}; got K={K}"
            )
    D = leibniz_coefficients(p, sigma, y, t, max(K, 2))
    c = p.taylor_coefficients(y, t, 1)
    # drift: -d/dy (rho p), rho = f + b sigma
    fpoly = model.drift_poly()
    if fpoly is not None:
        f = np.polynomial.polynomial.polyval(y, fpoly)
        df = np.polynomial.polynomial.polyval(y, np.polynomial.polynomial.polyder(fpoly))
    else:
        f = np.asarray(model.drift(y, t), dtype=float) * np.ones_like(y)
        df = fd_derivative(lambda u: np.asarray(model.drift(u, t), float) * np.ones_like(u), 1, y)
    if _is_poly(sigma):
        sig = np.polynomial.polynomial.polyval(y, sigma)
        dsig = np.polynomial.polynomial.polyval(y, np.polynomial.polynomial.polyder(sigma))
    else:
        sig = np.asarray(sigma(y, t), dtype=float) * np.ones_like(y)
        dsig = fd_derivative(lambda u: np.asarray(sigma(u, t), float) * np.ones_like(u), 1, y)
    rho = f + triplet.b * sig
    drho = df + triplet.b * dsig
    drift = -(drho * c[0] + rho * c[1])
    diffusion = triplet.A * D[2]  # (A/2) d^2(sigma^2 p) = A * D_2
    jumps = np.zeros_like(y)
    verdicts = []
    for z, w in triplet.atoms:
        terms = _jump_terms(D, z, K)
        _, v, _ = classify_terms(terms, tol, adaptive=False)
        verdicts.append(v)
        part = np.sum(terms, axis=0)
        if abs(z) < 1.0:
            part = part + z * D[1]
        jumps = jumps + w * part
    return RHSProfile(
        y=y,
        values=drift + diffusion + jumps,
        drift=drift,
        diffusion=diffusion,
        jumps=jumps,
        verdicts=_worst(verdicts, y.shape),
        K=K,
    )


def fpe_rhs(p, model, triplet, grid, t, K=40, tol=1e-12) -> np.ndarray:
    """Forward-equation right-hand side on the grid (series truncated at ``K``)."""
    return fpe_rhs_profile(p, model, triplet, grid, t, K, tol).values


def fpe_residual(p, model, triplet, grid, t, K=40, tol=1e-12):
    """``dp/dt - RHS`` on the grid; returns ``(max_abs, per_point)``."""
    rhs = fpe_rhs(p, model, triplet, grid, t, K, tol)
    res = p.dt(grid.points, t) - rhs
    return float(np.max(np.abs(res))), res


def series_divergence_probe(p, sigma, z, y, t, K_max=100, tol=1e-12) -> SeriesEvaluation:
    """Partial sums of ``sum_k (-z)^k/k! d^k(sigma^k p)`` at a single point."""
    if not 1 <= K_max <= K_LIMIT:
        raise ValueError(f"K_max must lie in [1, {K_LIMIT}]")
    D = leibniz_coefficients(p, sigma, np.float64(y), t, K_max)
    return SeriesEvaluation.from_terms(_jump_terms(D, float(z), K_max), tol)


# ------------------------------------------------------------------ growth fit
@dataclass
class GrowthFit:
    sup_norms: np.ndarray
    C_estimates: np.ndarray
    C_final: float
    bounded_verdict: bool


def _derivative_fn(fn, t):
    if isinstance(fn, JumpDiffusionDensity):
        if t is None:
            raise ValueError("a density needs the evaluation time t")
        return lambda k, x: fn.dy(k, x, t)
    if isinstance(fn, TestFunction):
        if not fn.builtin:
            raise ValueError("growth fit needs analytic derivatives; custom family refused")
        return fn.derivative
    raise TypeError("fn must be a TestFunction or a JumpDiffusionDensity")


def _sup_abs(d, y):
    vals = np.abs(np.asarray(d(y), dtype=float))
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo, hi = y[max(i - 1, 0)], y[min(i + 1, len(y) - 1)]
    # the grid maximum can miss the true peak by O(h^2); polish inside the bracketing cells
    res = minimize_scalar(lambda u: -abs(float(d(u))), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13 * max(1.0, abs(y[i]))})
    return max(best, -float(res.fun))


def derivative_growth_fit(fn: Union[TestFunction, JumpDiffusionDensity], grid: Grid, K: int,
                          t=None) -> GrowthFit:
    """Sup-norms ``g_k`` of the first ``K`` derivatives and the trend of ``g_k^(1/k)``."""
    if not 1 <= K <= GROWTH_K_LIMIT:
        raise ValueError(f"K must lie in [1, {GROWTH_K_LIMIT}]")
    deriv = _derivative_fn(fn, t)
    y = grid.points
    g = np.array([_sup_abs(lambda x, k=k: deriv(k, x), y) for k in range(1, K + 1)])
    k = np.arange(1, K + 1)
    with np.errstate(divide="ignore"):
        C = np.where(g > 0, np.exp(np.log(np.where(g > 0, g, 1.0)) / k), 0.0)
    tail = C[(K - 1) // 2:]
    bounded = bool(np.all(tail[1:] <= GROWTH_SLACK * tail[:-1]))
    return GrowthFit(g, C, float(C[-1]), bounded)
