"""Exhaustive path enumeration for short walks.

Every sign sequence of length n is enumerated with its quenched probability
(the product of the step probabilities read from the environment), giving the
exact distribution of the local-time functionals.  This is the independent
oracle the Monte Carlo side is checked against; 2^n paths bound n at 20.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .environment import Environment, exact_fraction
from .errors import BadBetaError, BadDeltaError, EmptyWalkError, OutOfRangeError, TooLargeError

MAX_EXACT_STEPS = 20
_CHUNK_BITS = 16


def _pmf_stats(pmf: dict) -> tuple[float, float]:
    mean = math.fsum(v * p for v, p in pmf.items())
    var = math.fsum((v - mean) ** 2 * p for v, p in pmf.items())
    return mean, math.sqrt(max(var, 0.0))


@dataclass(frozen=True)
class ExactDistribution:
    """Exact pmfs of the peak count, heavy-site counts and concentration radii."""

    n: int
    lstar_pmf: dict
    z_pmf: dict
    y_pmf: dict

    def total_probability(self) -> float:
        return math.fsum(self.lstar_pmf.values())

    def mean_lstar(self) -> float:
        return _pmf_stats(self.lstar_pmf)[0]

    def std_lstar(self) -> float:
        return _pmf_stats(self.lstar_pmf)[1]

    def mean_z(self, delta) -> float:
        return _pmf_stats(self.z_pmf[exact_fraction(delta)])[0]

    def std_z(self, delta) -> float:
        return _pmf_stats(self.z_pmf[exact_fraction(delta)])[1]

    def mean_y(self, beta) -> float:
        return _pmf_stats(self.y_pmf[exact_fraction(beta)])[0]

    def std_y(self, beta) -> float:
        return _pmf_stats(self.y_pmf[exact_fraction(beta)])[1]


def exact_distribution(env: Environment, n: int, deltas=(), betas=()) -> ExactDistribution:
    """Enumerate all 2^n paths of length n in the given environment."""
    if n < 0:
        raise OutOfRangeError(f"step count must be >= 0, got {n}")
    if n > MAX_EXACT_STEPS:
        raise TooLargeError(f"exact enumeration supports n <= {MAX_EXACT_STEPS}, got {n}")
    deltas = [exact_fraction(d) for d in deltas]
    betas = [exact_fraction(b) for b in betas]
    for d in deltas:
        if d <= 0:
            raise BadDeltaError(f"delta must be positive, got {d}")
    for b in betas:
        if not (0 <= b <= 1):
            raise BadBetaError(f"beta must lie in [0, 1], got {b}")
    if n == 0:
        if deltas or betas:
            raise EmptyWalkError("threshold functionals need at least one step")
        return ExactDistribution(0, {0: 1.0}, {}, {})

    width = 2 * n + 1
    alpha = env.alpha_block(-n, n)
    lstar_acc = np.zeros(n + 1, dtype=np.float64)
    z_acc = np.zeros((len(deltas), n + 1), dtype=np.float64)
    y_acc = np.zeros((len(betas), n + 1), dtype=np.float64)

    total_paths = 1 << n
    chunk = min(total_paths, 1 << _CHUNK_BITS)
    for start in range(0, total_paths, chunk):
        idx = np.arange(start, min(start + chunk, total_paths), dtype=np.uint32)
        bits = ((idx[:, None] >> np.arange(n, dtype=np.uint32)[None, :]) & 1).astype(np.int8)
        steps = 2 * bits - 1
        pos = np.cumsum(steps, axis=1, dtype=np.int8)
        prev = np.concatenate([np.zeros((len(idx), 1), dtype=np.int8), pos[:, :-1]], axis=1)
        a_prev = alpha[prev.astype(np.int32) + n]
        prob = np.prod(np.where(bits == 1, a_prev, 1.0 - a_prev), axis=1)

        counts = np.zeros((len(idx), width), dtype=np.int64)
        for s in range(-n, n + 1):
            counts[:, s + n] = (pos == s).sum(axis=1)

        lstar = counts.max(axis=1)
        lstar_acc += np.bincount(lstar, weights=prob, minlength=n + 1)

        for j, d in enumerate(deltas):
            heavy = (counts * d.denominator >= d.numerator * n).sum(axis=1)
            z_acc[j] += np.bincount(heavy, weights=prob, minlength=n + 1)

        if betas:
            prefix = np.concatenate(
                [np.zeros((len(idx), 1), dtype=np.int64), np.cumsum(counts, axis=1)], axis=1)
            best_by_r = np.empty((n + 1, len(idx)), dtype=np.int64)
            for r in range(n + 1):
                w = min(2 * r + 1, width)
                windows = prefix[:, w:] - prefix[:, :-w]
                best_by_r[r] = windows.max(axis=1) if windows.shape[1] else prefix[:, -1]
            for j, b in enumerate(betas):
                ok = best_by_r * b.denominator >= b.numerator * n
                y = np.argmax(ok, axis=0)
                y_acc[j] += np.bincount(y, weights=prob, minlength=n + 1)

    def to_pmf(acc: np.ndarray) -> dict:
        return {int(v): float(p) for v, p in enumerate(acc) if p > 0.0}

    return ExactDistribution(
        n,
        to_pmf(lstar_acc),
        {d: to_pmf(z_acc[j]) for j, d in enumerate(deltas)},
        {b: to_pmf(y_acc[j]) for j, b in enumerate(betas)},
    )
