"""
Exact generator versus its Taylor expansion
===========================================

A single unit jump at rate one, noise coefficient sigma(x) = -x, and a bump
test function supported on (-1, 1).  From x = 2 every jump lands on 0, so
the exact operator returns phi(0) - phi(2) = exp(-1).  The Taylor series of
the bump around x = 2 is identically zero, so every truncation returns 0.
"""
import math

import numpy as np

from levyfpe import Grid, LevyTriplet, SDEModel, bump, counterexample_report, exact_generator
from levyfpe.generator import series_partial_sums

phi = bump(0.0, 1.0)
model = SDEModel.counterexample()
nu = LevyTriplet.poisson(rate=1.0, jump=1.0)

print("exact   :", exact_generator(phi, model, nu, 2.0), " exp(-1) =", math.exp(-1))
sums = series_partial_sums(phi, model, nu, 2.0, 0.0, 100)
print("series  : partial sums S_1..S_100 all zero?", bool(np.all(sums == 0.0)))

# the disagreement is confined to points outside the support of phi
print()
print(f"{'x':>6} {'exact':>12} {'series':>12} verdict")
for row in counterexample_report(Grid(-3.0, 3.0, 13), K_max=100):
    print(f"{row.x:6.2f} {row.exact:12.6f} {row.series.value:12.6f} {row.series.verdict}")
