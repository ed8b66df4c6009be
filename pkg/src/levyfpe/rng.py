"""Counter-based random streams (Philox4x32-10), vectorised over counters.

Every draw is a pure function of ``(seed, path, stream, major, minor)``, so a
path's randomness does not depend on how paths are batched, ordered or
distributed across threads.
"""
from __future__ import annotations

import numpy as np

__all__ = ["philox4x32", "uniform_pair", "standard_normal", "standard_exponential"]

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_MASK = np.uint64(0xFFFFFFFF)
_SHIFT = np.uint64(32)

STREAM_NORMAL = 0
STREAM_ARRIVAL = 1


def philox4x32(c0, c1, c2, c3, key: int, rounds: int = 10):
    """Philox4x32 block function; counters are broadcastable uint32 arrays."""
    c0, c1, c2, c3 = np.broadcast_arrays(
        *(np.asarray(c, dtype=np.uint64) & _MASK for c in (c0, c1, c2, c3))
    )
    k0 = int(key) & 0xFFFFFFFF
    k1 = (int(key) >> 32) & 0xFFFFFFFF
    for _ in range(rounds):
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> _SHIFT) ^ c1 ^ np.uint64(k0),
            p1 & _MASK,
            (p0 >> _SHIFT) ^ c3 ^ np.uint64(k1),
            p0 & _MASK,
        )
        k0 = (k0 + _W0) & 0xFFFFFFFF
        k1 = (k1 + _W1) & 0xFFFFFFFF
    return c0, c1, c2, c3


def _to_open_unit(hi, lo):
    # 53-bit uniform strictly inside (0, 1)
    bits = ((hi >> np.uint64(5)) << np.uint64(26)) | (lo >> np.uint64(6))
    return (bits.astype(np.float64) + 0.5) * 2.0**-53


def uniform_pair(seed, path, stream, major, minor):
    """Two independent uniforms on (0, 1) per counter."""
    path = np.asarray(path, dtype=np.uint64)
    r0, r1, r2, r3 = philox4x32(path & _MASK, (path >> _SHIFT) | np.uint64(stream << 16),
                                major, minor, seed)
    return _to_open_unit(r0, r1), _to_open_unit(r2, r3)


def standard_normal(seed, path, major, minor):
    """Box-Muller normal from one Philox block."""
    u1, u2 = uniform_pair(seed, path, STREAM_NORMAL, major, minor)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def standard_exponential(seed, path, major, minor):
    u1, _ = uniform_pair(seed, path, STREAM_ARRIVAL, major, minor)
    return -np.log(u1)
