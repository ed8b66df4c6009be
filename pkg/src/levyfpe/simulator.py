"""Monte Carlo simulation of ``dX = f(X,t) dt + sigma(X-,t) dL`` with atomic jumps.

The continuous part is advanced by Euler-Maruyama with drift
``f + effective_drift(triplet) * sigma`` and noise ``sigma * sqrt(A) dW``. Each
atom contributes an independent Poisson stream of arrivals; an arrival at
time ``tau`` splits the Euler step there and adds ``sigma(X_{tau-}, tau) * z``
using the pre-jump state.

Randomness is drawn from counter-based streams keyed by ``(seed, path)``, so
results are bit-identical however paths are batched or threaded.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .levy import LevyTriplet, SDEModel, effective_drift
from .rng import STREAM_ARRIVAL, STREAM_NORMAL, uniform_pair
from .testfunctions import TestFunction

__all__ = [
    "SimConfig",
    "MCEstimate",
    "SimulationOverflow",
    "simulate_paths",
    "simulate_terminal",
    "terminal_values",
    "mc_expectation",
    "dynkin_rate",
    "counterexample_law",
]

BLOCK = 1 << 16


class SimulationOverflow(FloatingPointError):
    """The simulated state left the finite double range."""


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    n_paths: int = 100_000
    seed: int = 0
    antithetic: bool = False

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"time step must be positive, got dt={self.dt}")
        if self.dt > self.t_end:
            raise ValueError(f"dt={self.dt} exceeds t_end={self.t_end}")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ValueError(f"n_paths must be a positive integer, got {self.n_paths}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def replace(self, **kw) -> "SimConfig":
        d = dict(dt=self.dt, t_end=self.t_end, n_paths=self.n_paths,
                 seed=self.seed, antithetic=self.antithetic)
        d.update(kw)
        return SimConfig(**d)


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    n_paths: int
    seed: int
    delta_t: Optional[float] = None

    def z_score(self, target: float) -> float:
        """Distance from ``target`` in standard errors."""
        diff = abs(self.mean - target)
        if self.std_error == 0.0:
            return 0.0 if diff == 0.0 else math.inf
        return diff / self.std_error


def _eval(fn, x, t):
    return np.asarray(fn(x, t), dtype=float) * np.ones_like(x)


def _draws(cfg, paths, stream, major, minor):
    if cfg.antithetic:
        ctr, flip = paths // np.uint64(2), (paths % np.uint64(2)) == 1
    else:
        ctr, flip = paths, None
    u1, u2 = uniform_pair(cfg.seed, ctr, stream, major, minor)
    return u1, u2, flip


def _normal(cfg, paths, step, sub):
    u1, u2, flip = _draws(cfg, paths, STREAM_NORMAL, step, sub)
    z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    return np.where(flip, -z, z) if flip is not None else z


def _exponential(cfg, paths, event, atom):
    u1, _, flip = _draws(cfg, paths, STREAM_ARRIVAL, event, atom)
    if flip is not None:
        u1 = np.where(flip, 1.0 - u1, u1)
    return -np.log(u1)


def simulate_paths(model: SDEModel, triplet: LevyTriplet, x: float, s: float,
                   cfg: SimConfig, paths) -> np.ndarray:
    """Terminal values ``X_{t_end}`` for the given path indices."""
    paths = np.asarray(paths, dtype=np.uint64).ravel()
    if np.any(paths >= np.uint64(cfg.n_paths)):
        raise ValueError("path index out of range for n_paths")
    horizon = cfg.t_end - s
    if horizon < 0:
        raise ValueError(f"t_end={cfg.t_end} precedes start time s={s}")
    n = paths.size
    X = np.full(n, float(x))
    if horizon == 0 or n == 0:
        return X

    eff = effective_drift(triplet)
    A = triplet.A
    z = triplet.jump_sizes
    w = triplet.rates
    J = len(z)
    ev_count = np.zeros((J, n), dtype=np.int64)
    next_arr = np.full((J, n), np.inf)
    for j in range(J):
        next_arr[j] = s + _exponential(cfg, paths, 0, j) / w[j]

    def jump(idx, tau, jidx):
        xs = X[idx]
        X[idx] = xs + _eval(model.noise_intensity, xs, tau) * z[jidx]
        ev_count[jidx, idx] += 1
        p = paths[idx]
        for j in np.unique(jidx):
            sel = jidx == j
            ii = idx[sel]
            next_arr[j, ii] += _exponential(cfg, p[sel], ev_count[j, ii], j) / w[j]

    continuous = not (model.drift_is_zero and A == 0.0 and (eff == 0.0 or model.noise_is_zero))
    if not continuous:
        # state is frozen between arrivals: process events only
        while J:
            jidx = np.argmin(next_arr, axis=0)
            tau = next_arr[jidx, np.arange(n)]
            idx = np.nonzero(tau <= cfg.t_end)[0]
            if idx.size == 0:
                break
            jump(idx, tau[idx], jidx[idx])
            _check_finite(X, idx, tau[idx])
        return X

    n_steps = max(1, math.ceil(horizon / cfg.dt - 1e-9))
    cur = np.empty(n)
    sub = np.zeros(n, dtype=np.int64)
    for i in range(n_steps):
        t0 = s + i * cfg.dt
        t1 = cfg.t_end if i == n_steps - 1 else min(s + (i + 1) * cfg.dt, cfg.t_end)
        cur.fill(t0)
        sub.fill(0)
        idx = np.arange(n)
        while True:
            if J:
                jidx = np.argmin(next_arr[:, idx], axis=0)
                nxt = next_arr[jidx, idx]
            else:
                nxt = np.full(idx.size, np.inf)
            stop = np.minimum(nxt, t1)
            h = stop - cur[idx]
            xs, tc = X[idx], cur[idx]
            sig = _eval(model.noise_intensity, xs, tc)
            incr = (_eval(model.drift, xs, tc) + eff * sig) * h
            if A > 0.0:
                incr += sig * np.sqrt(A * h) * _normal(cfg, paths[idx], i, sub[idx])
            X[idx] = xs + incr
            ev = nxt <= t1
            if not ev.any():
                break
            idx, tau, jidx = idx[ev], nxt[ev], jidx[ev]
            jump(idx, tau, jidx)
            cur[idx] = tau
            sub[idx] += 1
        if not np.all(np.isfinite(X)):
            _check_finite(X, np.arange(n), np.full(n, t1))
    return X


def _check_finite(X, idx, t):
    bad = ~np.isfinite(X[idx])
    if bad.any():
        k = int(np.argmax(bad))
        raise SimulationOverflow(
            f"non-finite state {X[idx][k]} on path slot {int(idx[k])} at t={float(t[k]):.6g}"
        )


def simulate_terminal(model, triplet, x, s, cfg: SimConfig, path_index: int) -> float:
    """Terminal value of a single path; identical to its entry in a batch run."""
    if not 0 <= path_index < cfg.n_paths:
        raise ValueError("path_index must lie in [0, n_paths)")
    return float(simulate_paths(model, triplet, x, s, cfg, [path_index])[0])


def terminal_values(model, triplet, x, s, cfg: SimConfig, threads: int = 1) -> np.ndarray:
    """Terminal values of all ``cfg.n_paths`` paths, in path order.

    Paths are processed in fixed blocks; ``threads`` only changes how blocks
    are scheduled, never the result.
    """
    starts = range(0, cfg.n_paths, BLOCK)

    def run(a):
        return simulate_paths(model, triplet, x, s, cfg,
                              np.arange(a, min(a + BLOCK, cfg.n_paths)))

    if threads <= 1:
        parts = [run(a) for a in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, starts))
    return np.concatenate(parts)


def _estimate(values, cfg, delta_t=None) -> MCEstimate:
    n = values.size
    if n < 2:
        raise ValueError("an MC estimate needs at least two paths")
    if np.all(values == values[0]):
        return MCEstimate(float(values[0]), 0.0, n, cfg.seed, delta_t)
    return MCEstimate(float(np.mean(values)), float(np.std(values, ddof=1) / math.sqrt(n)),
                      n, cfg.seed, delta_t)


def mc_expectation(phi: TestFunction, model, triplet, x, s, cfg: SimConfig,
                   threads: int = 1) -> MCEstimate:
    """Sample mean and standard error of ``phi(X_{t_end})``."""
    X = terminal_values(model, triplet, x, s, cfg, threads)
    return _estimate(np.asarray(phi(X), dtype=float), cfg)


def dynkin_rate(phi: TestFunction, model, triplet, x, s, delta_t: float, cfg: SimConfig,
                threads: int = 1) -> MCEstimate:
    """Estimate ``(E[phi(X_{s+dt})] - phi(x)) / dt``.

    The Euler step is ``min(cfg.dt, delta_t)``; ``cfg.t_end`` is ignored. The
    estimate carries an O(delta_t) bias which callers budget for.
    """
    if not delta_t > 0:
        raise ValueError("delta_t must be positive")
    run_cfg = cfg.replace(dt=min(cfg.dt, delta_t), t_end=s + delta_t)
    X = terminal_values(model, triplet, x, s, run_cfg, threads)
    vals = (np.asarray(phi(X), dtype=float) - phi(x)) / delta_t
    return _estimate(vals, cfg, delta_t)


def counterexample_law(phi: TestFunction, x: float, t: float) -> float:
    """``E[phi(X_t)]`` for ``sigma = -x`` and a unit-rate Poisson driver with unit jumps.

    The first jump sends the state to 0, which is absorbing.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    return math.exp(-t) * phi(x) - math.expm1(-t) * phi(0.0)
