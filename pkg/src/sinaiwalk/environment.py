"""Environment laws, extremal valley environments, potentials and invariant measures.

A random environment assigns every lattice site a right-step probability in
(0, 1).  Recurrence requires the log-odds eps_i = log((1 - a_i)/a_i) to have
zero mean; everything the limit theory needs then reduces to the support
extremes of the law and their odds ratios, which are the per-step geometric
decay rates of the valley measures.

Two deterministic extremal environments are built here: the pointed valley
(steepest admissible slope on each side of the origin) and the flat-bottom
valley (a plateau of fair-coin sites at the bottom).  Their invariant
probability measures are computed with closed-form geometric tails, never by
truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    BadExtremesError,
    DegenerateError,
    DegenerateSupportError,
    DivergentTotalError,
    NoSolutionError,
    NotRecurrentError,
    OutOfRangeError,
)
from .rng import site_uniforms

WEIGHT_SUM_TOL = 1e-12
RECURRENCE_TOL = 1e-10
#: per-site invariant mass below which a site may be folded into a closed-form tail
MEASURE_SITE_CUTOFF = 1e-18


def log_odds(p: float) -> float:
    """log((1 - p)/p), the potential increment contributed by a site."""
    return math.log((1.0 - p) / p)


# ---------------------------------------------------------------------------
# environment law
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnvironmentDistribution:
    """Finite-support law of a single site's right-step probability."""

    support_points: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.support_points) != len(self.weights):
            raise OutOfRangeError("support points and weights differ in length")
        if not self.support_points:
            raise OutOfRangeError("support must not be empty")

    def mean_log_odds(self) -> float:
        return math.fsum(w * log_odds(p) for p, w in zip(self.support_points, self.weights))

    def var_log_odds(self) -> float:
        m = self.mean_log_odds()
        return math.fsum(w * (log_odds(p) - m) ** 2 for p, w in zip(self.support_points, self.weights))

    def effective_support(self) -> tuple[float, ...]:
        """Support points carrying strictly positive weight."""
        return tuple(p for p, w in zip(self.support_points, self.weights) if w > 0.0)

    def to_json(self) -> dict:
        return {"points": list(self.support_points), "weights": list(self.weights)}

    @classmethod
    def from_json(cls, doc: dict) -> "EnvironmentDistribution":
        return cls(tuple(float(p) for p in doc["points"]),
                   tuple(float(w) for w in doc["weights"]))

    @classmethod
    def balanced_two_point(cls, a: float, b: float) -> "EnvironmentDistribution":
        """Two-point law on {a, b} weighted so the mean log-odds vanishes."""
        p = solve_balanced_weight(a, b)
        return cls((a, b), (p, 1.0 - p))


def solve_balanced_weight(a: float, b: float) -> float:
    """Weight p with p*log_odds(a) + (1-p)*log_odds(b) = 0.

    Requires the two points to straddle 1/2, otherwise both log-odds share a
    sign and no mixture can balance them.
    """
    if not (0.0 < a < 1.0 and 0.0 < b < 1.0):
        raise OutOfRangeError(f"support points must lie in (0, 1), got {a}, {b}")
    ea, eb = log_odds(a), log_odds(b)
    if ea == eb or ea * eb >= 0.0:
        raise NoSolutionError(f"points {a}, {b} lie on the same side of 1/2")
    return -eb / (ea - eb)


@dataclass(frozen=True)
class SupportExtremes:
    """Support extremes of the law and their odds-ratio decay rates.

    ``right_decay`` and ``left_decay`` are the per-step geometric factors of
    the valley measure away from the bottom (odds of the lower extreme, and
    inverse odds of the upper extreme).
    """

    alpha_min: float
    alpha_max: float
    right_decay: float
    left_decay: float

    @classmethod
    def from_bounds(cls, alpha_min: float, alpha_max: float) -> "SupportExtremes":
        if not (0.0 <= alpha_min < 0.5 < alpha_max <= 1.0):
            raise BadExtremesError(
                f"need 0 <= alpha_min < 1/2 < alpha_max <= 1, got ({alpha_min}, {alpha_max})")
        return cls(alpha_min, alpha_max,
                   alpha_min / (1.0 - alpha_min),
                   (1.0 - alpha_max) / alpha_max)


def validate_distribution(dist: EnvironmentDistribution) -> SupportExtremes:
    """Check the standing hypotheses and return the support extremes.

    Raises OutOfRangeError for points outside (0, 1) or bad weights,
    DegenerateError when the law is a point mass, and NotRecurrentError when
    the mean log-odds is nonzero.
    """
    for p in dist.support_points:
        if not (0.0 < p < 1.0):
            raise OutOfRangeError(f"support point {p} outside (0, 1)")
    if any(w < 0.0 for w in dist.weights):
        raise OutOfRangeError("weights must be nonnegative")
    total = math.fsum(dist.weights)
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise OutOfRangeError(f"weights sum to {total!r}, not 1")
    support = dist.effective_support()
    if len(set(support)) <= 1:
        raise DegenerateError("law is a point mass; log-odds variance is zero")
    mean = dist.mean_log_odds()
    if abs(mean) > RECURRENCE_TOL:
        raise NotRecurrentError(f"mean log-odds is {mean:.3e}, walk would be transient")
    return SupportExtremes.from_bounds(min(support), max(support))


# ---------------------------------------------------------------------------
# environments
# ---------------------------------------------------------------------------

class Environment:
    """A deterministic total map site -> right-step probability.

    Instances are immutable and their queries are pure functions of the
    construction parameters, so they are safe to share across workers and
    may be materialized lazily in any order.
    """

    kind: str = "abstract"

    def alpha_at(self, site: int) -> float:
        raise NotImplementedError

    def alpha_block(self, lo: int, hi: int) -> np.ndarray:
        """Vector of alpha values for sites lo..hi inclusive."""
        return np.array([self.alpha_at(x) for x in range(lo, hi + 1)], dtype=np.float64)


class IidEnvironment(Environment):
    """I.i.d. sites; each value is a counter-based function of (seed, site)."""

    kind = "iid"

    def __init__(self, dist: EnvironmentDistribution, seed: int):
        self.dist = dist
        self.seed = int(seed)
        self._points = np.asarray(dist.support_points, dtype=np.float64)
        cw = np.cumsum(np.asarray(dist.weights, dtype=np.float64))
        cw[-1] = 1.0
        self._cumweights = cw

    def alpha_block(self, lo: int, hi: int) -> np.ndarray:
        u = site_uniforms(self.seed, np.arange(lo, hi + 1, dtype=np.int64))
        idx = np.searchsorted(self._cumweights, u, side="right")
        return self._points[idx]

    def alpha_at(self, site: int) -> float:
        return float(self.alpha_block(site, site)[0])


class ConstantEnvironment(Environment):
    """Every site shares one fixed probability (the simple-walk oracle case)."""

    kind = "constant"

    def __init__(self, p: float):
        if not (0.0 < p < 1.0):
            raise OutOfRangeError(f"probability {p} outside (0, 1)")
        self.p = float(p)

    def alpha_at(self, site: int) -> float:
        return self.p

    def alpha_block(self, lo: int, hi: int) -> np.ndarray:
        return np.full(hi - lo + 1, self.p, dtype=np.float64)


class PointedValleyEnvironment(Environment):
    """Steepest admissible slopes on both sides of the origin.

    Right of the origin every site pushes left as hard as the support allows,
    left of the origin every site pushes right; the origin itself is tilted
    toward the side holding the concentration interval (lower extreme when
    left_decay >= right_decay).
    """

    kind = "valley-th1"

    def __init__(self, extremes: SupportExtremes):
        if extremes.alpha_min <= 0.0:
            raise DegenerateSupportError("pointed valley needs alpha_min > 0 to stay in (0, 1)")
        self.extremes = extremes

    def alpha_at(self, site: int) -> float:
        ext = self.extremes
        if site > 0:
            return ext.alpha_min
        if site < 0:
            return ext.alpha_max
        return ext.alpha_min if ext.left_decay >= ext.right_decay else ext.alpha_max

    def alpha_block(self, lo: int, hi: int) -> np.ndarray:
        sites = np.arange(lo, hi + 1)
        out = np.where(sites > 0, self.extremes.alpha_min, self.extremes.alpha_max)
        out = out.astype(np.float64)
        if lo <= 0 <= hi:
            out[-lo] = self.alpha_at(0)
        return out


class FlatValleyEnvironment(Environment):
    """Valley with a plateau of fair-coin sites at the bottom.

    The plus variant puts the plateau on {0..plateau}, the minus variant on
    {-plateau..0}.  Transition probabilities are read off the exponential
    profile of the flat-bottom potential, so the invariant measure of the
    chain is exactly the flat-valley measure.
    """

    kind = "valley-th2"

    def __init__(self, extremes: SupportExtremes, plateau: int, sign: str):
        if plateau < 0:
            raise OutOfRangeError(f"plateau length must be >= 0, got {plateau}")
        if sign not in ("plus", "minus"):
            raise OutOfRangeError(f"sign must be 'plus' or 'minus', got {sign!r}")
        if extremes.alpha_min <= 0.0:
            raise DegenerateSupportError("flat valley needs alpha_min > 0 to stay in (0, 1)")
        self.extremes = extremes
        self.plateau = int(plateau)
        self.sign = sign

    def alpha_at(self, site: int) -> float:
        ext, g = self.extremes, self.plateau
        if self.sign == "plus":
            if site <= 0:
                return ext.alpha_max
            if site <= g:
                return 0.5
            if site == g + 1:
                q = ext.right_decay ** (g + 1)
                return q / (1.0 + q)
            return ext.alpha_min
        if site >= 1:
            return ext.alpha_min
        if site > -g:
            return 0.5
        if site == -g:
            q = ext.left_decay ** g / ext.right_decay
            return 1.0 / (1.0 + q)
        return ext.alpha_max

    def alpha_block(self, lo: int, hi: int) -> np.ndarray:
        return np.array([self.alpha_at(x) for x in range(lo, hi + 1)], dtype=np.float64)


def iid_environment(dist: EnvironmentDistribution, seed: int) -> IidEnvironment:
    """Reproducible i.i.d. environment for a validated law."""
    validate_distribution(dist)
    return IidEnvironment(dist, seed)


def pointed_valley_environment(extremes: SupportExtremes) -> PointedValleyEnvironment:
    return PointedValleyEnvironment(extremes)


def flat_valley_environment(extremes: SupportExtremes, plateau: int,
                            sign: str = "plus") -> FlatValleyEnvironment:
    return FlatValleyEnvironment(extremes, plateau, sign)


def environment_extremes(env: Environment) -> SupportExtremes:
    """Support extremes governing the limit constants of an environment."""
    if isinstance(env, (PointedValleyEnvironment, FlatValleyEnvironment)):
        return env.extremes
    if isinstance(env, IidEnvironment):
        return validate_distribution(env.dist)
    raise BadExtremesError(f"environment kind {env.kind!r} has no support extremes")


# ---------------------------------------------------------------------------
# closed-form exponential profiles of the extremal potentials
# ---------------------------------------------------------------------------

def pointed_valley_profile(extremes: SupportExtremes, x: int) -> float:
    """exp(-potential) of the pointed valley at site x.

    right_decay^x to the right of the origin, 1 at the origin, and a
    left_decay geometric to the left whose level depends on which side is
    flatter.  The left branch needs 1/right_decay when right_decay <
    left_decay, so a zero lower extreme is rejected there.
    """
    a, A = extremes.right_decay, extremes.left_decay
    if x > 0:
        return a ** x
    if x == 0:
        return 1.0
    if a < A:
        if a == 0.0:
            raise DegenerateSupportError("left branch needs 1/right_decay but right_decay = 0")
        return A ** (-x - 1) / a
    return A ** (-x - 1) * A


def flat_valley_profile(extremes: SupportExtremes, plateau: int, sign: str, x: int) -> float:
    """exp(-potential) of the flat-bottom valley at site x, per variant."""
    a, A = extremes.right_decay, extremes.left_decay
    if plateau < 0:
        raise OutOfRangeError(f"plateau length must be >= 0, got {plateau}")
    if sign == "plus":
        if x > plateau:
            return a ** x
        if x >= 0:
            return 1.0
        return A ** (-x)
    if sign == "minus":
        if a == 0.0:
            raise DegenerateSupportError("minus variant needs 1/right_decay but right_decay = 0")
        if x > 0:
            return a ** x
        if x >= -plateau:
            return 1.0
        return A ** (-x - 1) / a
    raise OutOfRangeError(f"sign must be 'plus' or 'minus', got {sign!r}")


# ---------------------------------------------------------------------------
# potential of an arbitrary environment
# ---------------------------------------------------------------------------

class Potential:
    """Two-sided partial sums of the log-odds increments of an environment.

    s_at(0) is exactly 0; s_at(k) - s_at(k-1) equals the log-odds of site k
    for k >= 1, with the mirrored identity on the negative side.
    """

    def __init__(self, env: Environment):
        self._env = env

    def s_block(self, lo: int, hi: int) -> np.ndarray:
        """Potential values for sites lo..hi inclusive."""
        out = np.zeros(hi - lo + 1, dtype=np.float64)
        if hi >= 1:
            a = self._env.alpha_block(1, hi)
            cs = np.cumsum(np.log((1.0 - a) / a))
            first = max(lo, 1)
            out[first - lo:] = cs[first - 1:]
        if lo <= -1:
            a = self._env.alpha_block(lo + 1, 0)
            eps = np.log((1.0 - a) / a)
            tail = np.cumsum(eps[::-1])[::-1]
            last = min(hi, -1)
            out[: last - lo + 1] = -tail[: last - lo + 1]
        return out

    def s_at(self, x: int) -> float:
        return float(self.s_block(x, x)[0])

    def exp_neg_block(self, lo: int, hi: int) -> np.ndarray:
        return np.exp(-self.s_block(lo, hi))


# ---------------------------------------------------------------------------
# invariant probability measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ProbMeasure:
    """Normalized site masses over a window plus closed-form tail masses.

    mass(x) is explicit for window sites; everything outside is aggregated
    into the two tail fields (each tail site carries less than the window
    cutoff, so pointwise queries outside return 0.0).
    """

    lo: int
    masses: np.ndarray
    tail_left: float
    tail_right: float

    @property
    def hi(self) -> int:
        return self.lo + len(self.masses) - 1

    @property
    def support_window(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    def mass(self, site: int) -> float:
        if self.lo <= site <= self.hi:
            return float(self.masses[site - self.lo])
        return 0.0

    def total_mass(self) -> float:
        return float(np.sum(self.masses)) + self.tail_left + self.tail_right

    def best_window(self, r: int) -> tuple[float, int]:
        """Largest mass of a (2r+1)-site window and its center.

        Ties go to the center of smallest absolute value, negative first.
        """
        if r < 0:
            raise OutOfRangeError(f"radius must be >= 0, got {r}")
        width = 2 * r + 1
        padded = np.concatenate([np.zeros(width), self.masses, np.zeros(width)])
        prefix = np.concatenate([[0.0], np.cumsum(padded)])
        sums = prefix[width:] - prefix[:-width]
        # window starting at padded index j covers sites lo - width + j ...
        centers = np.arange(len(sums)) + (self.lo - width) + r
        order = np.lexsort((centers > 0, np.abs(centers)))
        best = order[np.argmax(sums[order])]
        # argmax returns the first maximum in tie cases, which after the
        # lexsort is the smallest |center| with negative preferred
        return float(sums[best]), int(centers[best])


def measure_from_weights(lo: int, weights: np.ndarray,
                         tail_left: float = 0.0,
                         tail_right: float = 0.0) -> ProbMeasure:
    """Normalize exponential-potential weights into the invariant measure.

    ``weights[i]`` is exp(-potential) at site lo+i; the tail arguments are
    the closed-form sums of the same weights outside the window.  Site x of
    the measure receives (w(x-1) + w(x)) / (2 * total), which satisfies
    detailed balance for the chain whose right-step probability at x is
    w(x)/(w(x-1)+w(x)).
    """
    w = np.asarray(weights, dtype=np.float64)
    if len(w) < 2:
        raise DivergentTotalError("need at least two window sites")
    if np.any(w < 0.0) or tail_left < 0.0 or tail_right < 0.0:
        raise DivergentTotalError("weights must be nonnegative")
    total = float(np.sum(w)) + tail_left + tail_right
    if not math.isfinite(total) or total <= 0.0:
        raise DivergentTotalError(f"weight total {total!r} is not finite and positive")
    masses = (w[:-1] + w[1:]) / (2.0 * total)
    mass_left = (2.0 * tail_left + w[0]) / (2.0 * total)
    mass_right = (2.0 * tail_right + w[-1]) / (2.0 * total)
    return ProbMeasure(lo + 1, masses, mass_left, mass_right)


def _geometric_span(level: float, ratio: float, total_hint: float, minimum: int) -> int:
    """Sites needed before level*ratio^j falls under the tail cutoff."""
    if ratio <= 0.0 or level <= 0.0:
        return minimum
    target = MEASURE_SITE_CUTOFF * 2.0 * max(total_hint, 1.0)
    if level <= target:
        return minimum
    span = int(math.ceil(math.log(target / level) / math.log(ratio))) + 2
    return max(minimum, min(span, 200_000))


def pointed_valley_measure(extremes: SupportExtremes, min_halfwidth: int = 2) -> ProbMeasure:
    """Invariant measure of the pointed valley from its closed-form profile."""
    a, A = extremes.right_decay, extremes.left_decay
    level_left = pointed_valley_profile(extremes, -1)
    total_hint = 1.0 / max((1.0 - a) * (1.0 - A), 1e-6)
    hi = max(_geometric_span(a, a, total_hint, 2), min_halfwidth)
    lo = -max(_geometric_span(level_left, A, total_hint, 2), min_halfwidth)
    w = np.array([pointed_valley_profile(extremes, x) for x in range(lo - 1, hi + 1)])
    tail_right = w[-1] * a / (1.0 - a) if a > 0.0 else 0.0
    tail_left = w[0] * A / (1.0 - A) if A > 0.0 else 0.0
    return measure_from_weights(lo - 1, w, tail_left, tail_right)


def flat_valley_measure(extremes: SupportExtremes, plateau: int, sign: str,
                        min_halfwidth: int = 2) -> ProbMeasure:
    """Invariant measure of the flat-bottom valley from its closed-form profile."""
    a, A = extremes.right_decay, extremes.left_decay
    g = int(plateau)
    total_hint = (g + 2.0) / max((1.0 - a) * (1.0 - A), 1e-6)
    if sign == "plus":
        core_lo, core_hi = -2, g + 2
        level_right, level_left = a ** (g + 1), A
    else:
        core_lo, core_hi = -g - 2, 2
        level_right = a
        level_left = flat_valley_profile(extremes, g, sign, -g - 1)
    hi = max(core_hi + _geometric_span(level_right, a, total_hint, 0), min_halfwidth)
    lo = min(core_lo - _geometric_span(level_left, A, total_hint, 0), -min_halfwidth)
    w = np.array([flat_valley_profile(extremes, g, sign, x) for x in range(lo - 1, hi + 1)])
    tail_right = w[-1] * a / (1.0 - a) if a > 0.0 else 0.0
    tail_left = w[0] * A / (1.0 - A) if A > 0.0 else 0.0
    return measure_from_weights(lo - 1, w, tail_left, tail_right)


def stationary_measure(env: Environment, min_halfwidth: int = 2) -> ProbMeasure:
    """Invariant probability measure of a valley environment.

    Built from the environment's own potential, with geometric tails at the
    extremal decay rates beyond the core.  Only valley environments are
    positive recurrent; anything else is rejected.
    """
    if isinstance(env, PointedValleyEnvironment):
        core_lo, core_hi = -2, 2
    elif isinstance(env, FlatValleyEnvironment):
        if env.sign == "plus":
            core_lo, core_hi = -2, env.plateau + 2
        else:
            core_lo, core_hi = -env.plateau - 2, 2
    else:
        raise DivergentTotalError(
            f"environment kind {env.kind!r} is not positive recurrent; no invariant "
            "probability measure exists")
    ext = env.extremes
    a, A = ext.right_decay, ext.left_decay
    pot = Potential(env)
    core = pot.exp_neg_block(core_lo, core_hi)
    total_hint = float(np.sum(core)) / max((1.0 - a) * (1.0 - A), 1e-6)
    hi = max(core_hi + _geometric_span(float(core[-1]) * a, a, total_hint, 0), min_halfwidth)
    lo = min(core_lo - _geometric_span(float(core[0]) * A, A, total_hint, 0), -min_halfwidth)
    w = pot.exp_neg_block(lo - 1, hi)
    tail_right = w[-1] * a / (1.0 - a) if a > 0.0 else 0.0
    tail_left = w[0] * A / (1.0 - A) if A > 0.0 else 0.0
    return measure_from_weights(lo - 1, w, tail_left, tail_right)


# ---------------------------------------------------------------------------
# JSON wire formats
# ---------------------------------------------------------------------------

def environment_to_json(env: Environment) -> dict:
    """Environment spec document ({"kind": ...} plus variant fields)."""
    if isinstance(env, PointedValleyEnvironment):
        return {"kind": "valley-th1"}
    if isinstance(env, FlatValleyEnvironment):
        return {"kind": "valley-th2", "sign": env.sign, "g": env.plateau}
    if isinstance(env, IidEnvironment):
        return {"kind": "iid", "seed": env.seed, "dist": env.dist.to_json()}
    if isinstance(env, ConstantEnvironment):
        return {"kind": "constant", "p": env.p}
    raise OutOfRangeError(f"cannot serialize environment kind {env.kind!r}")


def environment_from_json(doc: dict, extremes: SupportExtremes | None = None,
                          dist: EnvironmentDistribution | None = None,
                          seed: int | None = None) -> Environment:
    """Rebuild an environment from its spec document.

    Valley documents carry no extremes of their own, so the caller provides
    them; i.i.d. documents may embed the law and the seed or rely on the
    corresponding arguments.
    """
    kind = doc.get("kind")
    if kind == "valley-th1":
        if extremes is None:
            raise BadExtremesError("valley-th1 spec needs support extremes")
        return PointedValleyEnvironment(extremes)
    if kind == "valley-th2":
        if extremes is None:
            raise BadExtremesError("valley-th2 spec needs support extremes")
        return FlatValleyEnvironment(extremes, int(doc["g"]), doc.get("sign", "plus"))
    if kind == "iid":
        law = dist if dist is not None else EnvironmentDistribution.from_json(doc["dist"])
        s = seed if seed is not None else doc.get("seed")
        if s is None:
            raise OutOfRangeError("iid spec needs a seed")
        return iid_environment(law, int(s))
    if kind == "constant":
        return ConstantEnvironment(float(doc["p"]))
    raise OutOfRangeError(f"unknown environment kind {kind!r}")


def exact_fraction(value) -> Fraction:
    """Exact rational from user input; decimal strings stay exact ("9/10")."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    raise OutOfRangeError(f"cannot interpret {value!r} as an exact fraction")
