"""Truncated series bookkeeping and the adaptive stopping rule.

Terms of Taylor-type series oscillate in sign and pass close to zero, so the
rule works on a sliding envelope ``e_K = max(|t_{K-3}|, ..., |t_K|)`` and a
per-term geometric rate ``r_K = (e_K / e_{K-4})^(1/4)`` measured across
disjoint windows. At the first ``K >= K_MIN`` with

    e_K < tol,  r_K < 1,  e_K * r_K / (1 - r_K) < tol

the series is declared converged. Otherwise the last three rates decide
between ``diverging`` (all > 1.5) and ``not-converged-by-K``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SeriesEvaluation",
    "K_MIN",
    "DIVERGENCE_RATIO",
    "classify_terms",
    "CONVERGED",
    "NOT_CONVERGED",
    "DIVERGING",
]

K_MIN = 8
WINDOW = 4
DIVERGENCE_RATIO = 1.5
CONVERGED = "converged"
NOT_CONVERGED = "not-converged-by-K"
DIVERGING = "diverging"


@dataclass
class SeriesEvaluation:
    """Partial sums ``S_1..S_K`` of a series plus a convergence verdict.

    ``partial_sums[i] = offset + sum(terms[:i+1])``; ``offset`` carries any
    constant that is not part of the power series (the small-jump
    compensation term).
    """

    partial_sums: np.ndarray
    terms: np.ndarray
    K_used: int
    converged: bool
    tail_estimate: float
    verdict: str
    offset: float = 0.0
    per_atom: list = field(default_factory=list, repr=False)

    @property
    def value(self) -> float:
        if self.K_used == 0:
            return float(self.offset)
        return float(self.partial_sums[self.K_used - 1])

    @classmethod
    def from_terms(cls, terms, tol, offset=0.0, adaptive=True):
        """Apply the stopping rule to ``terms[k-1] = t_k`` (k = 1..K_max)."""
        terms = np.asarray(terms, dtype=float)
        K_used, verdict, tail = classify_terms(terms, tol, adaptive=adaptive)
        used = terms[:K_used]
        return cls(
            partial_sums=offset + np.cumsum(used),
            terms=used,
            K_used=K_used,
            converged=verdict == CONVERGED,
            tail_estimate=tail,
            verdict=verdict,
            offset=float(offset),
        )


def _envelope_and_ratio(terms):
    a = np.abs(terms)
    env = a.copy()
    for lag in range(1, WINDOW):
        env[lag:] = np.maximum(env[lag:], a[:-lag])
    prev = np.full_like(env, np.inf)
    prev[WINDOW:] = env[:-WINDOW]
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(env == 0.0, 0.0, (env / prev) ** (1.0 / WINDOW))
    return env, r


def classify_terms(terms, tol, adaptive=True):
    """Stopping rule along axis 0 of ``terms`` (shape ``(K_max, ...)``).

    Returns ``(K_used, verdict, tail_estimate)``; for array input each is an
    array over the trailing axes. With ``adaptive=False`` the whole series is
    used and only the verdict at ``K_max`` is computed.
    """
    terms = np.asarray(terms, dtype=float)
    K_max = terms.shape[0]
    if K_max == 0:
        if terms.ndim == 1:
            return 0, NOT_CONVERGED, float("inf")
        shape = terms.shape[1:]
        return (np.zeros(shape, int), np.full(shape, NOT_CONVERGED, dtype=object),
                np.full(shape, np.inf))
    env, r = _envelope_and_ratio(terms)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        tail = np.where(r == 0.0, 0.0, np.where(r < 1.0, env * r / (1.0 - r), np.inf))
    k = np.arange(1, K_max + 1).reshape((-1,) + (1,) * (terms.ndim - 1))
    ok = (k >= min(K_MIN, K_max)) & (env < tol) & (r < 1.0) & (tail < tol)
    ok &= np.isfinite(env)
    if not adaptive:
        ok[:-1] = False
    hit = ok.any(axis=0)
    first = np.argmax(ok, axis=0)
    K_used = np.where(hit, first + 1, K_max)
    tail_at = np.take_along_axis(tail, (K_used - 1)[None, ...] if terms.ndim > 1
                                 else np.array([K_used - 1]), axis=0)[0]
    last3 = r[-3:] if K_max >= 3 else r[:0]
    diverging = (last3.shape[0] == 3) & np.all(last3 > DIVERGENCE_RATIO, axis=0)
    diverging |= ~np.all(np.isfinite(terms), axis=0)
    verdict = np.where(hit, CONVERGED, np.where(diverging, DIVERGING, NOT_CONVERGED))
    if terms.ndim == 1:
        return int(K_used), str(verdict), float(tail_at)
    return K_used, verdict.astype(object), tail_at
