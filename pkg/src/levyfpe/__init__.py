"""Generators, adjoints and forward equations for SDEs driven by Levy noise
with finitely many atoms, plus the numerical checks that tell an exact
integro-differential generator apart from its Taylor-series expansion.
"""
__version__ = "0.1.0"

from .levy import Grid, LevyTriplet, SDEModel, effective_drift
from .testfunctions import TestFunction, bump, cosine, custom, gaussian, poly_gaussian
from .density import JumpDiffusionDensity
from .series import SeriesEvaluation
from .generator import (
    counterexample_report,
    exact_generator,
    series_generator,
    shift_taylor_gap,
)
from .simulator import (
    MCEstimate,
    SimConfig,
    SimulationOverflow,
    dynkin_rate,
    mc_expectation,
    simulate_paths,
)
from .adjoint import (
    adjoint_term_check,
    derivative_growth_fit,
    fpe_residual,
    fpe_rhs,
    fpe_rhs_profile,
    series_divergence_probe,
)
from .quadrature import BoundaryError
