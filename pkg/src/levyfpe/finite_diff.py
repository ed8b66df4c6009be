"""Central finite differences for callables without analytic structure."""
from __future__ import annotations

import numpy as np

__all__ = ["fornberg_weights", "fd_derivative"]


def fornberg_weights(order: int, offsets) -> np.ndarray:
    """Weights of the ``order``-th derivative at 0 on the given stencil offsets.

    Fornberg's recursive algorithm; exact up to rounding for any stencil.
    """
    z = np.asarray(offsets, dtype=float)
    n = len(z)
    if order >= n:
        raise ValueError("stencil too small for requested derivative order")
    c = np.zeros((n, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = z[0]
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = z[i]
        for j in range(i):
            c3 = z[i] - z[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def fd_derivative(fn, order: int, x, h=None, half_width=None):
    """``order``-th derivative of a vectorised ``fn`` by a central stencil.

    The default step balances truncation against rounding for a stencil of
    accuracy order ~8; suitable for ``order <= 6``.
    """
    x = np.asarray(x, dtype=float)
    if order == 0:
        return np.asarray(fn(x), dtype=float)
    if half_width is None:
        half_width = order // 2 + 4
    if h is None:
        h = np.finfo(float).eps ** (1.0 / (order + 8)) * np.maximum(1.0, np.abs(x))
    offsets = np.arange(-half_width, half_width + 1)
    w = fornberg_weights(order, offsets)
    total = np.zeros(np.broadcast(x, h).shape)
    for o, wi in zip(offsets, w):
        if wi != 0.0:
            total = total + wi * np.asarray(fn(x + o * h), dtype=float)
    return total / np.asarray(h) ** order
