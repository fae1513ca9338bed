"""Concentration functionals of a local-time table.

Thresholds arrive as exact fractions so that boundary comparisons reduce to
integer arithmetic; floats are converted through their exact binary value.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .environment import exact_fraction
from .errors import BadBetaError, BadDeltaError, EmptyWalkError, OutOfRangeError
from .walk import LocalTimeTable


def _as_fraction(value) -> Fraction:
    if isinstance(value, float):
        return Fraction(value)
    return exact_fraction(value)


def max_site_visits(table: LocalTimeTable) -> int:
    """Largest visit count over all sites (0 for an empty table)."""
    if len(table.counts) == 0:
        return 0
    return int(table.counts.max())


def _best_window_sum(counts: np.ndarray, r: int) -> int:
    """Largest (2r+1)-window sum; windows clipped to the array lose nothing."""
    width = len(counts)
    w = min(2 * r + 1, width)
    if w == width:
        return int(counts.sum())
    prefix = np.concatenate([[0], np.cumsum(counts)])
    return int((prefix[w:] - prefix[:-w]).max())


def best_window_fraction(table: LocalTimeTable, r: int) -> Fraction:
    """Largest fraction of the n steps held by any (2r+1)-site window."""
    if table.n == 0:
        raise EmptyWalkError("window fraction undefined for a zero-step walk")
    if r < 0:
        raise OutOfRangeError(f"radius must be >= 0, got {r}")
    if len(table.counts) == 0:
        return Fraction(0)
    return Fraction(_best_window_sum(table.counts, r), table.n)


def concentration_radius(table: LocalTimeTable, beta, min_radius: int = 0) -> int:
    """Smallest radius r >= min_radius whose best window holds a beta fraction."""
    b = _as_fraction(beta)
    if not (0 <= b <= 1):
        raise BadBetaError(f"beta must lie in [0, 1], got {beta}")
    if table.n == 0:
        raise EmptyWalkError("concentration radius undefined for a zero-step walk")
    if min_radius < 0:
        raise OutOfRangeError(f"min_radius must be >= 0, got {min_radius}")
    target = b.numerator * table.n
    r = min_radius
    while True:
        if _best_window_sum(table.counts, r) * b.denominator >= target:
            return r
        r += 1


def heavy_site_count(table: LocalTimeTable, delta) -> int:
    """Number of sites visited at least a delta fraction of the n steps."""
    d = _as_fraction(delta)
    if d <= 0:
        raise BadDeltaError(f"delta must be positive, got {delta}")
    if table.n == 0:
        raise EmptyWalkError("heavy-site count undefined for a zero-step walk")
    if len(table.counts) == 0:
        return 0
    return int((table.counts * d.denominator >= d.numerator * table.n).sum())


@dataclass(frozen=True)
class ConcentrationReport:
    """All requested functionals of one table."""

    n: int
    lstar: int
    r_profile: tuple[tuple[int, Fraction], ...]
    y_values: tuple[tuple[Fraction, int], ...]
    z_values: tuple[tuple[Fraction, int], ...]


def concentration_report(table: LocalTimeTable, radii=(), betas=(), deltas=(),
                         min_radius: int = 0) -> ConcentrationReport:
    return ConcentrationReport(
        n=table.n,
        lstar=max_site_visits(table),
        r_profile=tuple((int(r), best_window_fraction(table, int(r))) for r in radii),
        y_values=tuple((_as_fraction(b), concentration_radius(table, b, min_radius))
                       for b in betas),
        z_values=tuple((_as_fraction(d), heavy_site_count(table, d)) for d in deltas),
    )
