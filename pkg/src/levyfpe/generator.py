"""Jump part of the infinitesimal generator: exact form versus Taylor series.

For an atomic Lévy measure the nonlocal operator is the finite sum::

    (A phi)(x) = sum_j w_j [phi(x + z_j s) - phi(x) - 1{|z_j|<1} z_j s phi'(x)],  s = sigma(x,t)

and its series representation replaces each shift ``phi(x + z_j s) - phi(x)``
by ``sum_{k>=1} (z_j s)^k phi^(k)(x) / k!``. The two agree for entire test
functions and disagree for compactly supported ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .levy import Grid, LevyTriplet, SDEModel
from .series import CONVERGED, DIVERGING, NOT_CONVERGED, SeriesEvaluation
from .testfunctions import TestFunction, bump

__all__ = [
    "OperatorComparison",
    "exact_generator",
    "series_generator",
    "series_partial_sums",
    "shift_taylor_gap",
    "counterexample_report",
    "K_LIMIT",
]

K_LIMIT = 170


@dataclass
class OperatorComparison:
    x: float
    exact: float
    series: SeriesEvaluation

    @property
    def gap(self) -> float:
        return abs(self.exact - self.series.value)


def exact_generator(phi: TestFunction, model: SDEModel, triplet: LevyTriplet, x, t=0.0):
    """Exact nonlocal operator applied to ``phi`` at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    s = np.asarray(model.noise_intensity(x, t), dtype=float) * np.ones_like(x)
    base = phi(x)
    total = np.zeros_like(x)
    need_slope = any(abs(z) < 1.0 for z, _ in triplet.atoms)
    slope = phi.derivative(1, x) if need_slope else 0.0
    for z, w in triplet.atoms:
        term = phi(x + z * s) - base
        if abs(z) < 1.0:
            term = term - z * s * slope
        total = total + w * term
    return float(total) if total.ndim == 0 else total


def _shift_terms(c_hat, log_rho, shift, K):
    """``t_k = shift^k phi^(k)(x)/k!`` for k = 1..K as sign * exp(log-magnitude)."""
    if shift == 0.0:
        return np.zeros(K)
    k = np.arange(1, K + 1)
    sign = np.sign(shift) ** k
    with np.errstate(over="ignore", invalid="ignore"):
        mag = np.exp(k * (math.log(abs(shift)) - log_rho))
        return np.where(c_hat[1:K + 1] == 0.0, 0.0, sign * mag * c_hat[1:K + 1])


def _check_series_inputs(phi, K_max):
    if not phi.builtin:
        raise ValueError("series evaluation needs a built-in test-function family")
    if not 1 <= K_max <= K_LIMIT:
        raise ValueError(f"K_max must lie in [1, {K_LIMIT}], got {K_max}")


def _per_atom_terms(phi, model, triplet, x, t, K):
    """Rows of per-atom series terms and the compensation offsets."""
    s = float(np.asarray(model.noise_intensity(np.float64(x), t), dtype=float))
    c_hat, log_rho = phi.scaled_taylor(np.float64(x), K)
    log_rho = float(log_rho)
    rows, offsets = [], []
    for z, w in triplet.atoms:
        rows.append(w * _shift_terms(c_hat, log_rho, z * s, K))
        if abs(z) < 1.0:
            # phi'(x) = c_1 / rho
            slope = c_hat[1] * math.exp(-log_rho) if c_hat[1] != 0.0 else 0.0
            offsets.append(-w * z * s * slope)
        else:
            offsets.append(0.0)
    return rows, offsets


def series_partial_sums(phi: TestFunction, model: SDEModel, triplet: LevyTriplet, x, t, K: int):
    """All partial sums ``S_1..S_K`` of the series form at a fixed truncation."""
    _check_series_inputs(phi, K)
    rows, offsets = _per_atom_terms(phi, model, triplet, x, t, K)
    if not rows:
        return np.zeros(K)
    return math.fsum(offsets) + np.cumsum(np.sum(rows, axis=0))


def series_generator(
    phi: TestFunction,
    model: SDEModel,
    triplet: LevyTriplet,
    x,
    t=0.0,
    K_max: int = 100,
    tol: float = 1e-12,
) -> SeriesEvaluation:
    """Series form of the generator at a single point with adaptive truncation.

    Each atom's series is truncated by the stopping rule on its own; the
    combined evaluation uses the largest order any atom needed. The verdict is
    the worst of the per-atom verdicts.
    """
    _check_series_inputs(phi, K_max)
    rows, offsets = _per_atom_terms(phi, model, triplet, x, t, K_max)
    if not rows:
        return SeriesEvaluation(np.zeros(0), np.zeros(0), 0, True, 0.0, CONVERGED, 0.0)
    per_atom = [SeriesEvaluation.from_terms(r, tol, offset=o) for r, o in zip(rows, offsets)]
    K_used = max(e.K_used for e in per_atom)
    terms = np.sum([r[:K_used] for r in rows], axis=0)
    offset = math.fsum(offsets)
    verdicts = {e.verdict for e in per_atom}
    if DIVERGING in verdicts:
        verdict = DIVERGING
    elif NOT_CONVERGED in verdicts:
        verdict = NOT_CONVERGED
    else:
        verdict = CONVERGED
    return SeriesEvaluation(
        partial_sums=offset + np.cumsum(terms),
        terms=terms,
        K_used=K_used,
        converged=verdict == CONVERGED,
        tail_estimate=math.fsum(e.tail_estimate for e in per_atom),
        verdict=verdict,
        offset=offset,
        per_atom=per_atom,
    )


def shift_taylor_gap(phi: TestFunction, x: float, h: float, K: int) -> float:
    """``|phi(x+h) - phi(x) - sum_{k=1..K} h^k phi^(k)(x)/k!|``."""
    _check_series_inputs(phi, K)
    c_hat, log_rho = phi.scaled_taylor(np.float64(x), K)
    terms = _shift_terms(c_hat, float(log_rho), float(h), K)
    return abs(phi(x + h) - phi(x) - math.fsum(terms))


def counterexample_report(x_grid: Grid, K_max: int = 100, tol: float = 1e-12):
    """Exact versus series generator for ``nu = delta_1``, ``sigma = -x``, bump test function."""
    phi = bump(0.0, 1.0)
    model = SDEModel.counterexample()
    triplet = LevyTriplet.poisson(rate=1.0, jump=1.0)
    out = []
    for x in x_grid.points:
        x = float(x)
        exact = exact_generator(phi, model, triplet, x, 0.0)
        ser = series_generator(phi, model, triplet, x, 0.0, K_max, tol)
        out.append(OperatorComparison(x, exact, ser))
    return out
