"""Composite Simpson quadrature on uniform grids with a decayed-boundary guard."""
from __future__ import annotations

import numpy as np
from scipy.integrate import simpson as _simpson

__all__ = ["BoundaryError", "simpson", "check_decayed", "BOUNDARY_TOL"]

BOUNDARY_TOL = 1e-14


class BoundaryError(ValueError):
    """An integrand is not negligible at the ends of the grid."""


def check_decayed(name: str, values, tol: float = BOUNDARY_TOL) -> None:
    v = np.asarray(values)
    ends = (abs(float(v[0])), abs(float(v[-1])))
    if not max(ends) < tol:
        raise BoundaryError(
            f"{name} is {max(ends):.3e} at the grid boundary (needs < {tol:g}); "
            "widen the grid so that boundary terms vanish"
        )


def simpson(values, h: float) -> float:
    return float(_simpson(np.asarray(values, dtype=float), dx=h))
