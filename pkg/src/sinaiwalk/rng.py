"""Counter-based per-site randomness.

Site values of an i.i.d. environment are pure functions of (seed, site), so
an environment can be extended lazily in any query order and always yields
the same values.  The mixer is the standard splitmix64 finalizer; one mixed
word per site is plenty for picking a support point from a finite law.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U53_INV = float(2.0**-53)


def mix64(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer applied elementwise to a uint64 array."""
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def site_uniforms(seed: int, sites: np.ndarray) -> np.ndarray:
    """Uniform [0, 1) values keyed by (seed, site), independent of query order.

    ``sites`` may be any integer array; negative sites map through two's
    complement, which keeps the counter bijective on 64 bits.
    """
    counters = np.asarray(sites, dtype=np.int64).view(np.uint64)
    with np.errstate(over="ignore"):
        base = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        words = mix64(base + (counters + np.uint64(1)) * _GOLDEN)
    return (words >> np.uint64(11)).astype(np.float64) * _U53_INV


def site_uniform(seed: int, site: int) -> float:
    """Scalar convenience wrapper around :func:`site_uniforms`."""
    return float(site_uniforms(seed, np.array([site], dtype=np.int64))[0])
