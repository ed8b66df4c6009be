"""
Adjoint terms and the forward-equation residual
===============================================

Each order of the series has an integration-by-parts partner acting on the
density.  For a constant noise coefficient the Gaussian-Poisson mixture is
an exact density, and the summed partners reproduce its time derivative.
"""
import numpy as np

from levyfpe import (Grid, JumpDiffusionDensity, LevyTriplet, SDEModel, adjoint_term_check, bump,
                     fpe_residual, fpe_rhs, gaussian)
from levyfpe.quadrature import simpson

p = JumpDiffusionDensity(0.0, 0.0, 0.0, 0.5, 1.0, 1.0)
wide = Grid(-20.0, 20.0, 4001)

print("order-k identity, sigma = -y, z = 1, t = 1")
for phi in (gaussian(0.0, 1.0), bump(0.0, 1.0)):
    for k in (1, 4, 8):
        r = adjoint_term_check(k, 1.0, (0.0, -1.0), p, phi, wide, 1.0)
        print(f"  {phi.family + str(phi.params):16s} k={k}: lhs={r.lhs: .3e} rhs={r.rhs: .3e} gap={r.gap:.1e}")

# the bump gaps shrink only as the grid resolves its derivatives
fine = Grid(-1.0, 1.0, 100_001)
r = adjoint_term_check(8, 1.0, (0.0, -1.0), p, bump(0.0, 1.0), fine, 1.0)
print(f"  bump k=8 on a 1e5-point grid over its support: gap={r.gap:.1e}")

model = SDEModel.constant(1.0)
nu = LevyTriplet(0.0, 0.5, ((1.0, 1.0),))
mx, _ = fpe_residual(JumpDiffusionDensity.from_model(model, nu), model, nu,
                     Grid(-8.0, 12.0, 801), 1.0, K=40)
print("\nmax |dp/dt - RHS| on [-8, 12]:", mx)
rhs = fpe_rhs(JumpDiffusionDensity.from_model(model, nu), model, nu, wide, 1.0)
print("integral of RHS over [-20, 20]:", simpson(rhs, wide.h))
