"""
How fast do derivatives grow?
=============================

Sup-norms g_k of the k-th derivative, summarised by C_k = g_k^(1/k).  A
bounded C_k means |phi^(k)| <= M C^k for all k; a rising one does not.
"""
from levyfpe import Grid, JumpDiffusionDensity, cosine, derivative_growth_fit, gaussian

grid = Grid(-5.0, 5.0, 201)
for fn in (cosine(2.0), gaussian(0.0, 1.0)):
    fit = derivative_growth_fit(fn, grid, 20)
    print(f"{fn.family + str(fn.params):16s} bounded={fit.bounded_verdict}  C_k =",
          " ".join(f"{c:.2f}" for c in fit.C_estimates[::3]))

p = JumpDiffusionDensity(0.0, 0.0, 0.0, 0.5, 1.0, 1.0)
fit = derivative_growth_fit(p, Grid(-6.0, 8.0, 561), 20, t=1.0)
print(f"{'mixture density':16s} bounded={fit.bounded_verdict}  C_20 = {fit.C_final:.2f}")
