"""Closed-form transition density of a constant-coefficient jump diffusion.

With drift ``mu``, Gaussian variance rate ``A`` and Poisson jumps of size ``J``
at rate ``lam``, the law of ``X_t`` given ``X_s = x0`` is the mixture::

    p(y, t) = sum_n Pois(n; lam*tau) * N(y; x0 + mu*tau + n*J, A*tau),   tau = t - s
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .levy import LevyTriplet, SDEModel, effective_drift

__all__ = [
    "JumpDiffusionDensity",
    "mixture_density",
    "mixture_density_dy",
    "mixture_density_dt",
    "TAIL_TARGET",
]

TAIL_TARGET = 1e-15


@dataclass(frozen=True)
class JumpDiffusionDensity:
    x0: float = 0.0
    s: float = 0.0
    drift_rate: float = 0.0
    A: float = 1.0
    lam: float = 0.0
    jump_size: float = 0.0
    n_max: Optional[int] = None

    def __post_init__(self):
        if not self.A > 0:
            raise ValueError(f"a transition density needs A > 0, got A={self.A}")
        if self.lam < 0:
            raise ValueError("jump rate must be non-negative")
        if self.n_max is not None and self.n_max < 0:
            raise ValueError("n_max must be non-negative")

    @classmethod
    def from_model(cls, model: SDEModel, triplet: LevyTriplet, x0=0.0, s=0.0, n_max=None):
        """Density of ``dX = f dt + sigma dL`` for constant ``f`` and ``sigma``.

        At most one atom is supported (a single jump size).
        """
        f, c = model.drift_poly(), model.noise_poly(s)
        if f is None or c is None or np.any(f[1:]) or np.any(c[1:]) or model.noise_time:
            raise ValueError("closed-form density needs constant drift and noise intensity")
        if len(triplet.atoms) > 1:
            raise ValueError("closed-form density supports at most one atom")
        sig = float(c[0])
        lam, jump = (0.0, 0.0)
        if triplet.atoms:
            z, w = triplet.atoms[0]
            lam, jump = (w, z * sig) if sig != 0.0 else (0.0, 0.0)
        return cls(
            x0=x0,
            s=s,
            drift_rate=float(f[0]) + effective_drift(triplet) * sig,
            A=triplet.A * sig * sig,
            lam=lam,
            jump_size=jump,
            n_max=n_max,
        )

    # ------------------------------------------------------------------ helpers
    def _tau(self, t) -> float:
        tau = float(t) - self.s
        if not tau > 0:
            raise ValueError(f"need t > s, got t={t}, s={self.s}")
        return tau

    def n_terms(self, t) -> int:
        """Poisson truncation index used at time ``t``."""
        if self.n_max is not None:
            return int(self.n_max)
        m = self.lam * self._tau(t)
        if m == 0.0:
            return 0
        n = int(m)
        while poisson.sf(n, m) >= TAIL_TARGET:
            n += 1
        return n

    def truncation_tail(self, t) -> float:
        """Poisson mass dropped by truncating the mixture at ``n_terms(t)``."""
        m = self.lam * self._tau(t)
        return float(poisson.sf(self.n_terms(t), m)) if m > 0 else 0.0

    def _weights(self, tau, n):
        k = np.arange(n + 1)
        m = self.lam * tau
        if m == 0.0:
            w = np.zeros(n + 1)
            w[0] = 1.0
            return w
        return np.exp(-m + k * math.log(m) - gammaln(k + 1))

    def _components(self, y, t):
        tau = self._tau(t)
        n = self.n_terms(t)
        v = self.A * tau
        sd = math.sqrt(v)
        mu = self.x0 + self.drift_rate * tau + np.arange(n + 1) * self.jump_size
        y = np.asarray(y, dtype=float)
        w = (y[None, ...] - mu.reshape((-1,) + (1,) * y.ndim)) / sd
        pdf = np.exp(-0.5 * w * w) / math.sqrt(2 * math.pi * v)
        return tau, n, sd, w, pdf

    # ------------------------------------------------------------------ values
    def pdf(self, y, t):
        tau, n, _, _, pdf = self._components(y, t)
        pi = self._weights(tau, n).reshape((-1,) + (1,) * (pdf.ndim - 1))
        return _out(np.sum(pi * pdf, axis=0))

    def scaled_taylor(self, y, t, K: int):
        """``(c_hat, log_rho)`` with ``d^k p/dy^k / k! = c_hat[k] / rho^k``.

        Probabilists' Hermite recursion per Gaussian component, normalised by
        ``sqrt(k!)``; ``rho`` is the component standard deviation.
        """
        tau, n, sd, w, pdf = self._components(y, t)
        pi = self._weights(tau, n).reshape((-1,) + (1,) * (pdf.ndim - 1))
        e_prev = np.zeros_like(w)
        e = pi * pdf
        c_hat = np.empty((K + 1,) + w.shape[1:])
        c_hat[0] = np.sum(e, axis=0)
        for k in range(K):
            e, e_prev = (w * e - math.sqrt(k) * e_prev) / math.sqrt(k + 1), e
            c_hat[k + 1] = np.sum(e, axis=0)
        k = np.arange(K + 1).reshape((-1,) + (1,) * (w.ndim - 1))
        c_hat *= (-1.0) ** k * np.exp(-0.5 * gammaln(k + 1))
        return c_hat, math.log(sd)

    def taylor_coefficients(self, y, t, K: int):
        """Unscaled ``d^k p/dy^k / k!`` for ``k = 0..K``."""
        c_hat, log_rho = self.scaled_taylor(y, t, K)
        k = np.arange(K + 1).reshape((-1,) + (1,) * np.ndim(y))
        with np.errstate(over="ignore", invalid="ignore"):
            return np.where(c_hat == 0.0, 0.0, c_hat * np.exp(-k * log_rho))

    def dy(self, k: int, y, t):
        c_hat, log_rho = self.scaled_taylor(y, t, k)
        with np.errstate(over="ignore", invalid="ignore"):
            val = np.where(c_hat[k] == 0.0, 0.0, c_hat[k] * np.exp(gammaln(k + 1) - k * log_rho))
        return _out(val)

    def dt(self, y, t):
        """Analytic time derivative.

        Weight part: ``d pi_n/dt = lam (pi_{n-1} - pi_n)``; kernel part:
        ``dN/dt = -mu dN/dy + (A/2) d^2N/dy^2``.
        """
        tau, n, sd, w, pdf = self._components(y, t)
        pi = self._weights(tau, n)
        dpi = -self.lam * pi
        dpi[1:] += self.lam * pi[:-1]
        shape = (-1,) + (1,) * (pdf.ndim - 1)
        dN = -w / sd * pdf
        d2N = (w * w - 1.0) / (sd * sd) * pdf
        kernel = -self.drift_rate * dN + 0.5 * self.A * d2N
        return _out(np.sum(dpi.reshape(shape) * pdf + pi.reshape(shape) * kernel, axis=0))


def _out(a):
    a = np.asarray(a, dtype=float)
    return float(a) if a.ndim == 0 else a


def mixture_density(d: JumpDiffusionDensity, y, t):
    return d.pdf(y, t)


def mixture_density_dy(d: JumpDiffusionDensity, k: int, y, t):
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    return d.dy(k, y, t)


def mixture_density_dt(d: JumpDiffusionDensity, y, t):
    return d.dt(y, t)
