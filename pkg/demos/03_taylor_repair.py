"""
Analytic test functions do not repair the series everywhere
===========================================================

Replacing the bump by an entire Gaussian makes the Taylor series converge,
but the number of terms it needs grows with the jump length |z sigma(x)|.
With sigma = -x and z = 1 the shift is the full distance to the origin.
"""
import numpy as np

from levyfpe import LevyTriplet, SDEModel, gaussian, series_generator
from levyfpe.generator import series_partial_sums

phi = gaussian(0.0, 1.0)
model = SDEModel.counterexample()
nu = LevyTriplet.poisson(1.0, 1.0)

print(f"{'x':>5} {'err K=40':>10} {'err K=100':>10} {'adaptive K':>10} verdict")
for x in (0.5, 1.0, 1.5, 2.0, 2.5, 3.0):
    target = phi(0.0) - phi(x)
    s = series_partial_sums(phi, model, nu, x, 0.0, 100)
    ev = series_generator(phi, model, nu, x, 0.0, 170, 1e-12)
    print(f"{x:5.1f} {abs(s[39] - target):10.2e} {abs(s[99] - target):10.2e} "
          f"{ev.K_used:10d} {ev.verdict}")

# K = 40 is not enough once |x| passes about 2.5; the stopping rule says so
