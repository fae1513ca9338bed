"""Closed-form limit constants for local-time concentration statistics.

Everything here is a pure function of the support extremes of the
environment law, expressed through the odds-ratio decay rates of the
extremal valley measure (``right_decay`` to the right of the bottom,
``left_decay`` to the left).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .environment import SupportExtremes
from .errors import (
    BadBetaError,
    BadDeltaError,
    BadExtremesError,
    DegenerateSupportError,
    NoValleyError,
)

#: slack applied toward acceptance in threshold comparisons, to keep integer
#: outputs stable when a fraction sits exactly on a window-mass value
THRESHOLD_SLACK = 1e-12


@dataclass(frozen=True)
class DecayParams:
    """Decay rates of the valley measure, with the originating extremes."""

    right_decay: float
    left_decay: float
    alpha_min: float | None = None
    alpha_max: float | None = None

    def __post_init__(self):
        if not (0.0 <= self.right_decay < 1.0 and 0.0 <= self.left_decay < 1.0):
            raise BadExtremesError(
                f"decay rates must lie in [0, 1), got ({self.right_decay}, {self.left_decay})")

    @classmethod
    def from_extremes(cls, ext: SupportExtremes) -> "DecayParams":
        return cls(ext.right_decay, ext.left_decay, ext.alpha_min, ext.alpha_max)

    @classmethod
    def from_bounds(cls, alpha_min: float, alpha_max: float) -> "DecayParams":
        return cls.from_extremes(SupportExtremes.from_bounds(alpha_min, alpha_max))

    @classmethod
    def from_decays(cls, right_decay: float, left_decay: float) -> "DecayParams":
        """Parameters given directly as decay rates (extremes derived)."""
        return cls(right_decay, left_decay,
                   right_decay / (1.0 + right_decay),
                   1.0 / (1.0 + left_decay))


def peak_mass_limit(alpha_min: float, alpha_max: float) -> float:
    """Limiting fraction of time spent at the single most-visited site."""
    if not (0.0 <= alpha_min < 0.5 < alpha_max <= 1.0):
        raise BadExtremesError(
            f"need 0 <= alpha_min < 1/2 < alpha_max <= 1, got ({alpha_min}, {alpha_max})")
    return ((2.0 * alpha_max - 1.0) * (1.0 - 2.0 * alpha_min)
            / (2.0 * (alpha_max - alpha_min) * min(alpha_max, 1.0 - alpha_min)))


def site_weight(l: int, params: DecayParams) -> float:
    """Unnormalized valley-measure profile at offset l.

    A geometric in right_decay on the nonnegative side and in left_decay on
    the negative side; the side carrying the peak depends on which decay is
    larger.
    """
    a, A = params.right_decay, params.left_decay
    if l >= 0:
        return a ** l * (a if a < A else 1.0)
    return A ** (-l - 1) * (1.0 if a < A else A)


def _mass_prefactor(params: DecayParams) -> float:
    """Normalization turning profile window sums into measure mass."""
    a, A = params.right_decay, params.left_decay
    return (1.0 - a) * (1.0 - A) / (2.0 * (1.0 - a * A))


def _window_weight_sum(center: int, r: int, params: DecayParams) -> float:
    """fsum of profile(k) + profile(k-1) over the window of radius r."""
    terms = [site_weight(k, params) for k in range(center - r - 1, center + r + 1)]
    terms += [site_weight(k, params) for k in range(center - r, center + r)]
    return math.fsum(terms)


def _scan_centers(r: int, margin: int):
    """Candidate window centers ordered by |x|, negative side first."""
    yield 0
    for x in range(1, r + margin + 1):
        yield -x
        yield x


def window_mass_limit(r: int, params: DecayParams, margin: int = 2) -> float:
    """Limiting mass of the best (2r+1)-site window of the valley measure.

    The optimal center always keeps the measure's peak inside the window, so
    scanning |center| <= r + margin is exhaustive; the wide-margin variant is
    asserted against this in the test suite.
    """
    if r < 0:
        raise BadBetaError(f"radius must be >= 0, got {r}")
    best = max(_window_weight_sum(x, r, params) for x in _scan_centers(r, margin))
    return _mass_prefactor(params) * best


def best_window_center(r: int, params: DecayParams, margin: int = 2) -> int:
    """Center achieving the best window; ties break to smallest |x|, negative first."""
    if r < 0:
        raise BadBetaError(f"radius must be >= 0, got {r}")
    best_val = -math.inf
    best_x = 0
    for x in _scan_centers(r, margin):
        v = _window_weight_sum(x, r, params)
        if v > best_val:
            best_val, best_x = v, x
    return best_x


def min_radius_for_fraction(beta, params: DecayParams) -> int | float:
    """Smallest radius whose limiting window mass reaches the fraction beta.

    Returns 0 for beta up to the single-site limit, infinity at beta = 1
    (every finite window misses positive tail mass while a decay is positive).
    """
    b = float(beta)
    if not (0.0 <= b <= 1.0):
        raise BadBetaError(f"beta must lie in [0, 1], got {beta}")
    if b >= 1.0:
        if params.right_decay == 0.0 and params.left_decay == 0.0:
            return 0
        return math.inf
    r = 0
    while window_mass_limit(r, params) < b - THRESHOLD_SLACK:
        r += 1
        if r > 1_000_000:
            raise RuntimeError("radius scan failed to converge")
    return r


def min_radius_symmetric(beta, right_decay: float) -> int:
    """Balanced-support shortcut for the concentration radius.

    Valid when the upper extreme mirrors the lower one; printed here exactly
    as the one-line inequality, which lands one unit above the general route
    whenever both decays coincide (the general route is authoritative).
    """
    b = float(beta)
    if not (0.0 <= b < 1.0):
        raise BadBetaError(f"beta must lie in [0, 1), got {beta}")
    if not (0.0 < right_decay < 1.0):
        raise DegenerateSupportError(
            f"shortcut needs right_decay in (0, 1), got {right_decay}")
    f = 1
    while 1.0 - (1.0 + right_decay) * right_decay ** (f - 1) / 2.0 < b - THRESHOLD_SLACK:
        f += 1
        if f > 1_000_000:
            raise RuntimeError("radius scan failed to converge")
    return f


def saturation_slope(params: DecayParams) -> float:
    """Growth rate of the concentration radius as the fraction approaches 1.

    max(1/|log left_decay|, 1/|log right_decay|); a vanishing decay
    contributes nothing and is dropped.
    """
    terms = []
    if params.right_decay > 0.0:
        terms.append(1.0 / abs(math.log(params.right_decay)))
    if params.left_decay > 0.0:
        terms.append(1.0 / abs(math.log(params.left_decay)))
    if not terms:
        raise DegenerateSupportError("both decay rates are zero; slope undefined")
    return max(terms)


def plateau_length(delta, params: DecayParams, sign: str = "plus") -> int:
    """Longest flat valley bottom whose plateau mass still reaches delta.

    Largest integer g with g <= 1/delta - 1 - (tail corrections at g); the
    left side grows by one per step while the right side only increases, so
    an upward scan finds the answer.
    """
    d = float(delta)
    if d <= 0.0:
        raise BadDeltaError(f"delta must be positive, got {delta}")
    a, A = params.right_decay, params.left_decay
    if sign not in ("plus", "minus"):
        raise BadDeltaError(f"sign must be 'plus' or 'minus', got {sign!r}")
    if sign == "minus" and a == 0.0:
        raise DegenerateSupportError("minus variant needs right_decay > 0")

    def rhs(g: int) -> float:
        if sign == "plus":
            correction = a ** (g + 1) / (1.0 - a) + A / (1.0 - A)
        else:
            correction = (A ** g / a) / (1.0 - A) + a / (1.0 - a)
        return 1.0 / d - 1.0 - correction

    if 0 > rhs(0) + THRESHOLD_SLACK:
        raise NoValleyError(f"no plateau satisfies the threshold at delta = {delta}")
    g = 0
    limit = int(1.0 / d) + 2
    while g + 1 <= rhs(g + 1) + THRESHOLD_SLACK and g + 1 <= limit:
        g += 1
    return g


def heavy_site_limit_bounds(delta, params: DecayParams) -> tuple[float, float]:
    """Lower and upper limits for the count of sites visited a delta-fraction of time.

    Upper bound is the counting identity 1/delta; the lower bound subtracts
    the larger of the two flat-valley tail corrections, each evaluated at its
    own plateau length.
    """
    d = float(delta)
    if d <= 0.0:
        raise BadDeltaError(f"delta must be positive, got {delta}")
    a, A = params.right_decay, params.left_decay
    if a == 0.0:
        raise DegenerateSupportError("bounds need right_decay > 0")
    g_plus = plateau_length(delta, params, "plus")
    g_minus = plateau_length(delta, params, "minus")
    corr_plus = a ** (g_plus + 1) / (1.0 - a) + A / (1.0 - A)
    corr_minus = (A ** g_minus / a) / (1.0 - A) + a / (1.0 - a)
    lower = 1.0 / d - 1.0 - max(corr_plus, corr_minus)
    return lower, 1.0 / d


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TheoryReport:
    """Every limit constant evaluated for the requested radii and fractions."""

    c1: float
    slope: float | None
    g_profile: tuple[tuple[int, float], ...]
    a_plus: tuple[tuple[int, int], ...]
    f_beta: tuple[tuple[Fraction, "int | float"], ...]
    f_simplified: tuple[tuple[Fraction, "int | None"], ...]
    g_delta: tuple[tuple[Fraction, "int | None"], ...]
    z_lower: tuple[tuple[Fraction, "float | None"], ...]
    z_upper: tuple[tuple[Fraction, "float | None"], ...]

    def to_json_dict(self) -> dict:
        def frac(x):
            return str(x)
        return {
            "c1": self.c1,
            "slope": self.slope,
            "g_profile": [[r, v] for r, v in self.g_profile],
            "a_plus": [[r, x] for r, x in self.a_plus],
            "f_beta": [[frac(b), v] for b, v in self.f_beta],
            "f_simplified": [[frac(b), v] for b, v in self.f_simplified],
            "g_delta": [[frac(d), v] for d, v in self.g_delta],
            "z_lower": [[frac(d), v] for d, v in self.z_lower],
            "z_upper": [[frac(d), v] for d, v in self.z_upper],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    def format_table(self) -> str:
        def num(v):
            if v is None:
                return "-"
            if v == math.inf:
                return "inf"
            if isinstance(v, int):
                return str(v)
            return f"{v:.12g}"

        lines = [f"{'c1':<16} {num(self.c1)}",
                 f"{'slope':<16} {num(self.slope)}"]
        for r, v in self.g_profile:
            lines.append(f"{f'g({r})':<16} {num(v)}")
        for r, x in self.a_plus:
            lines.append(f"{f'a_plus(r={r})':<16} {num(x)}")
        for b, v in self.f_beta:
            lines.append(f"{f'f_beta({b})':<16} {num(v)}")
        for b, v in self.f_simplified:
            lines.append(f"{f'f_simplified({b})':<16} {num(v)}")
        for d, v in self.g_delta:
            lines.append(f"{f'g_delta({d})':<16} {num(v)}")
        for d, v in self.z_lower:
            lines.append(f"{f'z_lower({d})':<16} {num(v)}")
        for d, v in self.z_upper:
            lines.append(f"{f'z_upper({d})':<16} {num(v)}")
        return "\n".join(lines)


def theory_report(params: DecayParams, betas=(), deltas=(), radii=()) -> TheoryReport:
    """Evaluate every predictor on the requested grids."""
    if params.alpha_min is None or params.alpha_max is None:
        raise BadExtremesError("report needs the originating support extremes")
    c1 = peak_mass_limit(params.alpha_min, params.alpha_max)
    try:
        slope = saturation_slope(params)
    except DegenerateSupportError:
        slope = None
    g_profile = tuple((int(r), window_mass_limit(int(r), params)) for r in radii)
    a_plus = tuple((int(r), best_window_center(int(r), params)) for r in radii)
    f_beta = tuple((b, min_radius_for_fraction(b, params)) for b in betas)
    f_simpl = []
    for b in betas:
        if float(b) < 1.0 and 0.0 < params.right_decay < 1.0:
            f_simpl.append((b, min_radius_symmetric(b, params.right_decay)))
        else:
            f_simpl.append((b, None))
    g_delta, z_lo, z_hi = [], [], []
    for d in deltas:
        try:
            g_delta.append((d, plateau_length(d, params, "plus")))
        except (NoValleyError, DegenerateSupportError):
            g_delta.append((d, None))
        try:
            lo, hi = heavy_site_limit_bounds(d, params)
            z_lo.append((d, lo))
            z_hi.append((d, hi))
        except (NoValleyError, DegenerateSupportError):
            z_lo.append((d, None))
            z_hi.append((d, None))
    return TheoryReport(c1=c1, slope=slope, g_profile=g_profile, a_plus=a_plus,
                        f_beta=f_beta, f_simplified=tuple(f_simpl),
                        g_delta=tuple(g_delta), z_lower=tuple(z_lo), z_upper=tuple(z_hi))
