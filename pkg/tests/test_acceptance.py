"""Acceptance gate: one check per acceptance criterion, one PASS/FAIL line each.

Every check computes its measured quantities with the library, compares them
to the stated threshold and asserts, so a failing criterion shows up red.
The lines are also echoed in the pytest terminal summary, and the module
can be run directly with ``python3 tests/test_acceptance.py``.
"""
import math
import time

import numpy as np
import pytest

from levyfpe.adjoint import adjoint_term_check, derivative_growth_fit, fpe_residual, fpe_rhs
from levyfpe.density import JumpDiffusionDensity
from levyfpe.generator import exact_generator, series_partial_sums
from levyfpe.levy import Grid, LevyTriplet, SDEModel
from levyfpe.quadrature import simpson
from levyfpe.simulator import BLOCK, SimConfig, counterexample_law, dynkin_rate, mc_expectation
from levyfpe.testfunctions import bump, cosine, gaussian

LINES = []

CE = SDEModel.counterexample()
DELTA1 = LevyTriplet.poisson(1.0, 1.0)
E1 = math.exp(-1.0)


def _record(n, ok, detail, elapsed, budget=None):
    if budget is not None and elapsed >= budget:
        ok = False
        detail += f"; runtime over {budget:g} s"
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} | {detail} | {elapsed:.2f} s"
    LINES.append(line)
    print(line)
    return ok


# ------------------------------------------------------------------ 1
def criterion_1():
    t0 = time.perf_counter()
    phi = bump(0.0, 1.0)
    exact = exact_generator(phi, CE, DELTA1, 2.0)
    sums = series_partial_sums(phi, CE, DELTA1, 2.0, 0.0, 100)
    all_zero = bool(np.all(sums == 0.0))
    gap = abs(exact - sums[-1])
    ok = abs(exact - E1) < 1e-12 and all_zero and abs(gap - E1) < 1e-12
    return _record(1, ok, f"exact={exact:.12f} series_K<=100_all_zero={all_zero} gap={gap:.12f}",
                   time.perf_counter() - t0, 1.0)


# ------------------------------------------------------------------ 2
def criterion_2():
    t0 = time.perf_counter()
    cfg = SimConfig(dt=1e-3, n_paths=1_000_000, seed=0)
    est = dynkin_rate(bump(0.0, 1.0), CE, DELTA1, 2.0, 0.0, 1e-3, cfg, threads=4)
    near = abs(est.mean - 0.36788) <= 3 * est.std_error + 1e-2
    far = est.z_score(0.0) >= 10
    return _record(2, near and far,
                   f"rate={est.mean:.5f} se={est.std_error:.5f} "
                   f"|rate-0.36788|={abs(est.mean - 0.36788):.5f} z_series={est.z_score(0.0):.1f}",
                   time.perf_counter() - t0, 60.0)


# ------------------------------------------------------------------ 3
def criterion_3():
    t0 = time.perf_counter()
    phi = gaussian(0.0, 1.0)
    x = Grid(-3.0, 3.0, 61).points
    s40 = np.array([series_partial_sums(phi, CE, DELTA1, xi, 0.0, 40)[-1] for xi in x])
    err = np.abs(s40 - (phi(0.0) - phi(x)))
    i = int(np.argmax(err))
    return _record(3, bool(err[i] < 1e-8),
                   f"sup|series_40-(phi(0)-phi(x))|={err[i]:.3e} at x={x[i]:g} (threshold 1e-8)",
                   time.perf_counter() - t0, 1.0)


# ------------------------------------------------------------------ 4
def criterion_4():
    t0 = time.perf_counter()
    grid = Grid(-20.0, 20.0, 4001)
    dens = {"gaussian": JumpDiffusionDensity(0.0, 0.0, 0.0, 0.5, 0.0, 1.0),
            "mixture": JumpDiffusionDensity(0.0, 0.0, 0.0, 0.5, 1.0, 1.0)}
    phis = {"gaussian(0,1)": gaussian(0.0, 1.0), "gaussian(1,2)": gaussian(1.0, 2.0),
            "bump(0,1)": bump(0.0, 1.0)}
    sigmas = {"1": (1.0,), "-y": (0.0, -1.0)}
    worst = {name: (0.0, None) for name in phis}
    n_bad = n = 0
    for pname, p in dens.items():
        for fname, phi in phis.items():
            for sname, sig in sigmas.items():
                for z in (1.0, 0.5):
                    for k in range(1, 11):
                        r = adjoint_term_check(k, z, sig, p, phi, grid, 1.0)
                        rel = r.gap / max(abs(r.lhs), 1.0)
                        n += 1
                        n_bad += rel >= 1e-6
                        if rel > worst[fname][0]:
                            worst[fname] = (rel, (pname, sname, z, k))
    detail = f"{n - n_bad}/{n} cells pass; worst scaled gap " + ", ".join(
        f"{f}={w:.1e}" for f, (w, _) in worst.items())
    return _record(4, n_bad == 0, detail, time.perf_counter() - t0, 10.0)


# ------------------------------------------------------------------ 5
def criterion_5():
    t0 = time.perf_counter()
    grid = Grid(-8.0, 12.0, 801)
    model = SDEModel.constant(1.0)
    trip = LevyTriplet(0.0, 0.5, ((1.0, 1.0),))
    mx, _ = fpe_residual(JumpDiffusionDensity.from_model(model, trip), model, trip, grid, 1.0, K=40)
    ctrl = LevyTriplet(0.0, 0.5, ())
    mx0, _ = fpe_residual(JumpDiffusionDensity.from_model(model, ctrl), model, ctrl, grid, 1.0,
                          K=40)
    return _record(5, mx < 1e-6 and mx0 < 1e-10,
                   f"max_residual={mx:.3e} (< 1e-6), control={mx0:.3e} (< 1e-10)",
                   time.perf_counter() - t0, 5.0)


# ------------------------------------------------------------------ 6
def criterion_6():
    t0 = time.perf_counter()
    grid = Grid(-5.0, 5.0, 201)
    cos_fit = derivative_growth_fit(cosine(2.0), grid, 20)
    g_fit = derivative_growth_fit(gaussian(0.0, 1.0), grid, 20)
    C = g_fit.C_estimates[4:20]
    cos_ok = abs(cos_fit.C_final - 2.0) <= 0.1 and cos_fit.bounded_verdict
    g_ok = bool(np.all(np.diff(C) > 0)) and not g_fit.bounded_verdict
    return _record(6, cos_ok and g_ok,
                   f"cosine(2) C={cos_fit.C_final:.6f} bounded={cos_fit.bounded_verdict}; "
                   f"gaussian C_5..C_20 {C[0]:.3f}->{C[-1]:.3f} increasing="
                   f"{bool(np.all(np.diff(C) > 0))} bounded={g_fit.bounded_verdict}",
                   time.perf_counter() - t0, 1.0)


# ------------------------------------------------------------------ 7
def criterion_7():
    t0 = time.perf_counter()
    phi = bump(0.0, 1.0)
    worst_z = 0.0
    hits = 0
    for x in (-2.0, -0.5, 0.0, 0.5, 2.0):
        for t in (0.25, 1.0, 2.0):
            est = mc_expectation(phi, CE, DELTA1, x, 0.0,
                                 SimConfig(dt=1e-3, t_end=t, n_paths=100_000, seed=2024))
            law = counterexample_law(phi, x, t)
            hits += abs(est.mean - law) <= 3 * est.std_error + 8 * np.finfo(float).eps
            if est.std_error > 0:
                worst_z = max(worst_z, abs(est.mean - law) / est.std_error)
    lattice_ok = hits == 15
    small = mc_expectation(phi, CE, DELTA1, 2.0, 0.0, SimConfig(n_paths=25_000, seed=77))
    big = mc_expectation(phi, CE, DELTA1, 2.0, 0.0, SimConfig(n_paths=100_000, seed=77))
    ratio = small.std_error / big.std_error
    halves = 1.5 <= ratio <= 2.5
    cfg = SimConfig(n_paths=2 * BLOCK + 123, seed=2**63 + 5)
    a = mc_expectation(phi, CE, DELTA1, 2.0, 0.0, cfg, threads=1)
    b = mc_expectation(phi, CE, DELTA1, 2.0, 0.0, cfg, threads=4)
    same = (a.mean, a.std_error) == (b.mean, b.std_error)
    return _record(7, lattice_ok and halves and same,
                   f"lattice {hits}/15 within 3 SE (worst z={worst_z:.2f}); "
                   f"SE ratio at 4x paths={ratio:.3f}; threads 1 vs 4 bit-exact={same}",
                   time.perf_counter() - t0)


# ------------------------------------------------------------------ 8
def criterion_8():
    t0 = time.perf_counter()
    grid = Grid(-20.0, 20.0, 4001)
    model = SDEModel.constant(1.0)
    trip = LevyTriplet(0.0, 0.5, ((1.0, 1.0),))
    rhs = fpe_rhs(JumpDiffusionDensity.from_model(model, trip), model, trip, grid, 1.0, K=40)
    total = simpson(rhs, grid.h)
    return _record(8, abs(total) < 1e-6, f"|integral of RHS|={abs(total):.3e} (< 1e-6)",
                   time.perf_counter() - t0)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4,
            criterion_5, criterion_6, criterion_7, criterion_8]


@pytest.mark.parametrize("check", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 9)])
def test_acceptance(check):
    assert check()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
