"""Lévy triplets with atomic jump measures, SDE coefficients and grids."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "LevyTriplet",
    "SDEModel",
    "Grid",
    "effective_drift",
    "NOISE_FAMILIES",
]

NOISE_FAMILIES = ("constant", "time-only", "linear-in-x", "polynomial-in-x", "general")


@dataclass(frozen=True)
class LevyTriplet:
    """Lévy triplet ``(b, A, nu)`` with ``nu = sum_j w_j delta_{z_j}``.

    Parameters
    ----------
    b : float
        Deterministic drift of the Lévy process.
    A : float
        Gaussian variance coefficient, ``A >= 0``.
    atoms : sequence of (z, w)
        Jump sizes ``z != 0`` (pairwise distinct) and rates ``w > 0``.
    """

    b: float = 0.0
    A: float = 0.0
    atoms: tuple = ()

    def __post_init__(self):
        atoms = tuple((float(z), float(w)) for z, w in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "A", float(self.A))
        if not math.isfinite(self.b):
            raise ValueError("drift b must be finite")
        if not (self.A >= 0.0 and math.isfinite(self.A)):
            raise ValueError(f"Gaussian variance A must be finite and >= 0, got {self.A}")
        sizes = set()
        for z, w in atoms:
            if z == 0.0 or not math.isfinite(z):
                raise ValueError(f"atom jump size must be finite and nonzero, got {z}")
            if not (w > 0.0 and math.isfinite(w)):
                raise ValueError(f"atom weight must be finite and positive, got {w}")
            if z in sizes:
                raise ValueError(f"duplicate atom jump size {z}")
            sizes.add(z)

    @classmethod
    def poisson(cls, rate: float = 1.0, jump: float = 1.0) -> "LevyTriplet":
        """Pure Poisson process: ``nu = rate * delta_jump``."""
        return cls(0.0, 0.0, ((jump, rate),))

    @property
    def total_rate(self) -> float:
        return math.fsum(w for _, w in self.atoms)

    @property
    def jump_sizes(self) -> np.ndarray:
        return np.array([z for z, _ in self.atoms])

    @property
    def rates(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms])


def effective_drift(triplet: LevyTriplet) -> float:
    """Drift after moving compensated small jumps into a compound-Poisson part.

    ``b - sum_{|z_j|<1} w_j z_j``.
    """
    return triplet.b - math.fsum(w * z for z, w in triplet.atoms if abs(z) < 1.0)


def _poly_callable(coeffs):
    c = np.asarray(coeffs, dtype=float)

    def f(x, t):
        x = np.asarray(x, dtype=float)
        return np.polynomial.polynomial.polyval(x, c) + 0.0 * np.asarray(t, dtype=float)

    return f


@dataclass(frozen=True)
class SDEModel:
    """Coefficients ``f(x,t)`` and ``sigma(x,t)`` of ``dX = f dt + sigma dL``.

    Both callables must accept numpy arrays. Polynomial families also carry
    their coefficients so that derivatives of any order are exact; for those
    ``sigma(x, t) = noise_time(t) * poly(noise_coeffs)(x)``.
    """

    drift: Callable
    noise_intensity: Callable
    noise_family: str = "general"
    drift_coeffs: Optional[tuple] = None
    noise_coeffs: Optional[tuple] = None
    noise_time: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.noise_family not in NOISE_FAMILIES:
            raise ValueError(f"unknown noise family {self.noise_family!r}")
        if self.noise_coeffs is not None and len(self.noise_coeffs) > 3:
            raise ValueError("polynomial noise intensity must have degree <= 2")

    # -- constructors --------------------------------------------------------
    @classmethod
    def _build(cls, family, noise_coeffs, drift, noise_time=None):
        if callable(drift):
            f, dc = drift, None
        else:
            dc = tuple(float(c) for c in np.atleast_1d(drift))
            f = _poly_callable(dc)
        nc = tuple(float(c) for c in noise_coeffs) if noise_coeffs is not None else None
        if noise_time is None:
            sigma = _poly_callable(nc)
        else:
            base = _poly_callable(nc)

            def sigma(x, t):
                return noise_time(t) * base(x, t)

        return cls(f, sigma, family, dc, nc, noise_time)

    @classmethod
    def constant(cls, c: float, drift=0.0) -> "SDEModel":
        return cls._build("constant", (c,), drift)

    @classmethod
    def linear(cls, alpha: float, beta: float = 0.0, drift=0.0) -> "SDEModel":
        """``sigma(x,t) = alpha*x + beta``."""
        return cls._build("linear-in-x", (beta, alpha), drift)

    @classmethod
    def counterexample(cls) -> "SDEModel":
        """``f = 0`` and ``sigma(x,t) = -x``."""
        return cls.linear(-1.0, 0.0)

    @classmethod
    def polynomial(cls, coeffs: Sequence[float], drift=0.0, time_factor=None) -> "SDEModel":
        """``sigma(x,t) = time_factor(t) * sum_i coeffs[i] x^i`` (degree <= 2)."""
        if len(coeffs) > 3:
            raise ValueError("polynomial noise intensity must have degree <= 2")
        return cls._build("polynomial-in-x", coeffs, drift, time_factor)

    @classmethod
    def time_only(cls, g: Callable, drift=0.0) -> "SDEModel":
        return cls._build("time-only", (1.0,), drift, g)

    @classmethod
    def general(cls, drift: Callable, noise_intensity: Callable) -> "SDEModel":
        return cls(drift, noise_intensity, "general")

    # -- queries ---------------------------------------------------------------
    def noise_poly(self, t: float) -> Optional[np.ndarray]:
        """Ascending coefficients of ``sigma(., t)`` or ``None`` if not polynomial."""
        if self.noise_coeffs is None:
            return None
        c = np.asarray(self.noise_coeffs, dtype=float)
        if self.noise_time is not None:
            c = c * float(self.noise_time(t))
        return c

    def drift_poly(self) -> Optional[np.ndarray]:
        if self.drift_coeffs is None:
            return None
        return np.asarray(self.drift_coeffs, dtype=float)

    @property
    def drift_is_zero(self) -> bool:
        return self.drift_coeffs is not None and not any(self.drift_coeffs)

    @property
    def noise_is_zero(self) -> bool:
        return self.noise_coeffs is not None and self.noise_time is None and not any(
            self.noise_coeffs
        )

    def check_family(self, n: int = 100, seed: int = 0, rtol: float = 1e-9) -> bool:
        """Sample ``sigma`` at ``n`` random points and test the declared tag."""
        rng = np.random.default_rng(seed)
        x = rng.uniform(-5, 5, n)
        t = rng.uniform(0, 5, n)
        s = np.asarray(self.noise_intensity(x, t), dtype=float) * np.ones(n)
        scale = max(1.0, float(np.max(np.abs(s))))
        fam = self.noise_family
        if fam == "general":
            return True
        if fam == "constant":
            return bool(np.all(np.abs(s - s[0]) <= rtol * scale))
        if fam == "time-only":
            s2 = np.asarray(self.noise_intensity(x + 1.0, t), dtype=float) * np.ones(n)
            return bool(np.all(np.abs(s - s2) <= rtol * scale))
        # divided differences along x at fixed t: linear kills the 2nd, quadratic the 3rd
        h = 0.5
        vals = [np.asarray(self.noise_intensity(x + i * h, t), dtype=float) * np.ones(n)
                for i in range(4)]
        if fam == "linear-in-x":
            d = vals[2] - 2 * vals[1] + vals[0]
        else:
            d = vals[3] - 3 * vals[2] + 3 * vals[1] - vals[0]
        big = max(scale, max(float(np.max(np.abs(v))) for v in vals))
        return bool(np.all(np.abs(d) <= 1e-9 * big))


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``n >= 3`` points on ``[lo, hi]``."""

    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"grid needs an integer n >= 3, got {self.n}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise ValueError(f"grid needs finite lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, int(self.n))
