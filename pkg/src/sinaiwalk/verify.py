"""Self-contained invariant suite behind the `verify` CLI subcommand.

Each check re-derives a contract from scratch (independent summation, naive
reference loops, exact enumeration) so that a perturbation of any single
formula constant in the library makes at least one check fail.  All checks
are seeded and deterministic.
"""

from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import concentration as conc
from . import theory
from .environment import (
    ConstantEnvironment,
    EnvironmentDistribution,
    Potential,
    SupportExtremes,
    flat_valley_environment,
    iid_environment,
    pointed_valley_environment,
    pointed_valley_measure,
    pointed_valley_profile,
    solve_balanced_weight,
    stationary_measure,
    validate_distribution,
)
from .errors import DegenerateError, NoSolutionError, NotRecurrentError, OutOfRangeError
from .exact import exact_distribution
from .harness import ExperimentConfig, emit_csv, run_experiment
from .walk import LocalTimeTable, ensemble_functionals, simulate

GRID = [(round(0.05 * i, 2), round(0.05 * j, 2))
        for i in range(1, 10) for j in range(11, 20)]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _valley_envs(ext):
    yield pointed_valley_environment(ext)
    yield flat_valley_environment(ext, 8, "plus")
    yield flat_valley_environment(ext, 3, "minus")


def check_distribution_hypotheses() -> str | None:
    ext = validate_distribution(EnvironmentDistribution((0.25, 0.75), (0.5, 0.5)))
    if not (ext.alpha_min == 0.25 and ext.alpha_max == 0.75):
        return f"extremes wrong: {ext}"
    if abs(ext.right_decay - 1 / 3) > 1e-15 or abs(ext.left_decay - 1 / 3) > 1e-15:
        return "decay rates wrong for the symmetric two-point law"
    for law, exc in [
        (EnvironmentDistribution((0.5,), (1.0,)), DegenerateError),
        (EnvironmentDistribution((0.3, 0.6), (0.5, 0.5)), NotRecurrentError),
        (EnvironmentDistribution((0.0, 0.75), (0.5, 0.5)), OutOfRangeError),
    ]:
        try:
            validate_distribution(law)
            return f"{law} unexpectedly accepted"
        except exc:
            pass
    p = solve_balanced_weight(0.2, 0.6)
    resid = p * math.log(4.0) - (1 - p) * math.log(1.5)
    if abs(resid) > 1e-12:
        return f"balanced weight residual {resid:.2e}"
    try:
        solve_balanced_weight(0.3, 0.4)
        return "same-side two-point law unexpectedly balanced"
    except NoSolutionError:
        pass
    return None


def check_detailed_balance() -> str | None:
    worst = 0.0
    for amin, amax in GRID:
        ext = SupportExtremes.from_bounds(amin, amax)
        for env in _valley_envs(ext):
            mu = stationary_measure(env, min_halfwidth=102)
            masses = np.array([mu.mass(x) for x in range(-101, 102)])
            lhs = masses[:-1] * env.alpha_block(-101, 100)
            rhs = masses[1:] * (1.0 - env.alpha_block(-100, 101))
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    if worst > 1e-12:
        return f"max detailed-balance residual {worst:.3e} > 1e-12"
    return None


def check_potential_consistency() -> str | None:
    for amin, amax in [(0.1, 0.6), (0.05, 0.95), (0.3, 0.55), (0.45, 0.9)]:
        ext = SupportExtremes.from_bounds(amin, amax)
        if ext.right_decay == ext.left_decay:
            continue
        env = pointed_valley_environment(ext)
        q_env = Potential(env).exp_neg_block(-50, 50)
        q_closed = np.array([pointed_valley_profile(ext, x) for x in range(-50, 51)])
        err = np.max(np.abs(q_env - q_closed) / np.maximum(np.abs(q_closed), 1.0))
        if err > 1e-12:
            return f"profile mismatch {err:.3e} at extremes ({amin}, {amax})"
    # equal decay rates: the origin tie-break shifts the potential one site
    ext = SupportExtremes.from_bounds(0.25, 0.75)
    env = pointed_valley_environment(ext)
    q_env = Potential(env).exp_neg_block(-20, 20)
    q_shift = np.array([pointed_valley_profile(ext, x + 1) / ext.right_decay
                        for x in range(-20, 21)])
    if np.max(np.abs(q_env - q_shift)) > 1e-12:
        return "tie-break shift identity violated at equal decay rates"
    return None


def check_iid_determinism() -> str | None:
    law = EnvironmentDistribution((0.25, 0.5, 0.75), (0.4, 0.2, 0.4))
    env = iid_environment(law, 1234)
    single = [env.alpha_at(x) for x in (5, -3, 0, 5, -3)]
    if single[0] != single[3] or single[1] != single[4]:
        return "repeated queries disagree"
    block = env.alpha_block(-10, 10)
    for i, x in enumerate(range(-10, 10 + 1)):
        if block[i] != env.alpha_at(x):
            return "block and scalar queries disagree"
    other = iid_environment(law, 1235)
    if np.array_equal(env.alpha_block(0, 99), other.alpha_block(0, 99)):
        return "distinct seeds produced identical first 100 sites"
    sites = env.alpha_block(-50_000, 49_999)
    for p, w in zip(law.support_points, law.weights):
        freq = float(np.mean(sites == p))
        sd = math.sqrt(w * (1 - w) / 100_000)
        if abs(freq - w) > 6 * sd:
            return f"frequency of point {p}: {freq:.4f} vs weight {w}"
    return None


def check_measure_normalization() -> str | None:
    worst = 0.0
    for amin, amax in GRID:
        ext = SupportExtremes.from_bounds(amin, amax)
        for env in _valley_envs(ext):
            worst = max(worst, abs(stationary_measure(env).total_mass() - 1.0))
        worst = max(worst, abs(pointed_valley_measure(ext).total_mass() - 1.0))
    if worst > 1e-12:
        return f"normalization off by {worst:.3e}"
    return None


def check_walker_conservation() -> str | None:
    ext = SupportExtremes.from_bounds(0.25, 0.75)
    envs = [pointed_valley_environment(ext),
            iid_environment(EnvironmentDistribution((0.25, 0.75), (0.5, 0.5)), 7)]
    for env in envs:
        traj = simulate(env, 4096, 11, checkpoints=(1, 64, 512, 4096))
        prev = None
        for step, table in zip(traj.checkpoint_steps, traj.snapshots):
            if table.total() != step or table.n != step:
                return f"counts sum {table.total()} != step {step}"
            lo, hi = table.visited_range
            if lo < -step or hi > step:
                return f"visited range {(lo, hi)} outside [-n, n]"
            for site, cnt in table.items():
                # site k is only visitable at steps of its parity >= |k|
                if cnt > (step - abs(site)) // 2 + 1:
                    return f"count {cnt} at site {site} too large for parity"
            if prev is not None:
                for site, cnt in prev.items():
                    if table.count(site) < cnt:
                        return "checkpoint snapshots are not sitewise monotone"
            prev = table
        again = simulate(env, 4096, 11, checkpoints=(1, 64, 512, 4096))
        for a, b in zip(traj.snapshots, again.snapshots):
            if a.lo != b.lo or not np.array_equal(a.counts, b.counts):
                return "identical seeds gave different tables"
    return None


def check_mc_vs_oracle() -> str | None:
    ext = SupportExtremes.from_bounds(0.25, 0.75)
    delta, beta = Fraction(1, 4), Fraction(1, 2)
    for env in (ConstantEnvironment(0.5), pointed_valley_environment(ext)):
        n = 6
        oracle = exact_distribution(env, n, deltas=[delta], betas=[beta])
        mc = ensemble_functionals(env, n, 1_000_000, 2718, deltas=[delta], betas=[beta])
        pairs = [(mc["lstar"], oracle.mean_lstar(), oracle.std_lstar()),
                 (mc["z"][delta], oracle.mean_z(delta), oracle.std_z(delta)),
                 (mc["y"][beta], oracle.mean_y(beta), oracle.std_y(beta))]
        for arr, mean, std in pairs:
            se = std / math.sqrt(len(arr)) if std > 0 else 1e-12
            if abs(float(arr.mean()) - mean) > 3 * se:
                return (f"MC mean {float(arr.mean()):.5f} vs exact {mean:.5f} "
                        f"beyond 3 SE in {env.kind}")
    return None


def _random_tables(count: int, seed: int):
    rng = np.random.Generator(np.random.PCG64(seed))
    for _ in range(count):
        width = int(rng.integers(1, 30))
        lo = int(rng.integers(-20, 5))
        counts = rng.integers(0, 40, size=width)
        if counts.sum() == 0:
            counts[int(rng.integers(0, width))] = 1
        yield LocalTimeTable.from_counts(
            {lo + i: int(c) for i, c in enumerate(counts)})


def check_duality() -> str | None:
    betas = [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(9, 10), Fraction(1)]
    for table in _random_tables(1000, 31415):
        for b in betas:
            got = conc.concentration_radius(table, b)
            r = 0
            while True:
                # naive reference: direct double loop over centers and offsets
                lo, hi = table.visited_range
                best = 0
                for x in range(lo - r, hi + r + 1):
                    s = sum(table.count(k) for k in range(x - r, x + r + 1))
                    best = max(best, s)
                if Fraction(best, table.n) >= b:
                    break
                r += 1
            if got != r:
                return f"duality broken: got {got}, naive {r} at beta={b}"
    return None


def check_concentration_monotonicity() -> str | None:
    betas = [Fraction(k, 10) for k in range(0, 11)]
    deltas = [Fraction(k, 20) for k in range(1, 21)]
    for table in _random_tables(120, 999):
        width = table.hi - table.lo + 1
        prev = Fraction(-1)
        for r in range(0, width + 2):
            cur = conc.best_window_fraction(table, r)
            if cur < prev or cur > 1:
                return "window fraction not monotone or above 1"
            if 2 * r + 1 >= width and cur != 1:
                return "full-width window does not capture all mass"
            prev = cur
        prev_y = -1
        for b in betas:
            y = conc.concentration_radius(table, b)
            if y < prev_y:
                return "concentration radius decreasing in beta"
            prev_y = y
        prev_z = None
        for d in deltas:
            z = conc.heavy_site_count(table, d)
            if z > math.floor(1 / d):
                return f"heavy-site count {z} above floor(1/delta) at delta={d}"
            if prev_z is not None and z > prev_z:
                return "heavy-site count increasing in delta"
            prev_z = z
    return None


def check_peak_identity() -> str | None:
    worst = 0.0
    for amin, amax in GRID:
        params = theory.DecayParams.from_bounds(amin, amax)
        worst = max(worst, abs(theory.window_mass_limit(0, params)
                               - theory.peak_mass_limit(amin, amax)))
    if worst > 1e-12:
        return f"peak identity off by {worst:.3e}"
    return None


def check_route_equality() -> str | None:
    worst = 0.0
    for amin, amax in GRID:
        ext = SupportExtremes.from_bounds(amin, amax)
        params = theory.DecayParams.from_extremes(ext)
        mu = pointed_valley_measure(ext)
        for r in range(0, 21):
            direct = theory.window_mass_limit(r, params)
            via_measure, _ = mu.best_window(r)
            worst = max(worst, abs(direct - via_measure))
    if worst > 1e-12:
        return f"route disagreement {worst:.3e}"
    return None


def check_monotone_convergence() -> str | None:
    for amin, amax in [(0.25, 0.75), (0.1, 0.6), (0.45, 0.55), (0.05, 0.95)]:
        params = theory.DecayParams.from_bounds(amin, amax)
        prev = -1.0
        for r in range(0, 40):
            g = theory.window_mass_limit(r, params)
            if g > 1.0 + 1e-15 or g < prev:
                return f"window mass limit decreasing at ({amin}, {amax})"
            # strictly increasing while the tail is still resolvable in floats
            if prev < 1.0 - 1e-12 and g <= prev:
                return f"window mass limit stalls early at ({amin}, {amax})"
            prev = g
        if 1.0 - prev > 1e-3:
            return f"window mass limit stalls at {prev}"
        prev_f = -1
        for b in [Fraction(k, 20) for k in range(0, 20)]:
            f = theory.min_radius_for_fraction(b, params)
            if f < prev_f:
                return "radius not monotone in the fraction"
            prev_f = f
    return None


def check_argmax_sign() -> str | None:
    for amin, amax in GRID:
        params = theory.DecayParams.from_bounds(amin, amax)
        for r in range(0, 6):
            center = theory.best_window_center(r, params)
            if params.right_decay >= params.left_decay and center < 0:
                return f"center {center} negative with right decay dominant"
            if params.right_decay < params.left_decay and center > 0:
                return f"center {center} positive with left decay dominant"
    return None


def check_corollary_proxy() -> str | None:
    for amin in (0.05, 0.25, 0.4):
        params = theory.DecayParams.from_bounds(amin, 1.0 - amin)
        f = theory.min_radius_for_fraction(1.0 - 1e-10, params)
        slope = theory.saturation_slope(params)
        rel = abs(f / (10.0 * math.log(10.0)) - slope) / slope
        if rel > 0.10:
            return f"proxy slope off by {rel:.3f} at alpha_min={amin}"
    return None


def check_harness_determinism() -> str | None:
    config = ExperimentConfig(env={"kind": "valley-th1"}, steps=4000, replicas=2,
                              seed=5, alpha_min=0.25, alpha_max=0.75,
                              checkpoint_start=100, checkpoint_ratio=2.0,
                              beta=(Fraction(9, 10),), delta=(Fraction(1, 10),),
                              r=(0, 2))
    res1 = run_experiment(config)
    res2 = run_experiment(config)
    if not np.array_equal(res1.values, res2.values):
        return "re-running the experiment changed the values"
    with tempfile.TemporaryDirectory() as tmp:
        p1 = emit_csv(res1, Path(tmp) / "a.csv")
        p2 = emit_csv(res2, Path(tmp) / "b.csv")
        if p1.read_bytes() != p2.read_bytes():
            return "CSV bytes differ between identical runs"
    diffs = np.diff(res1.running_max, axis=1)
    if diffs.size and float(diffs.min()) < 0:
        return "running max decreased along checkpoints"
    return None


CHECKS = [
    ("distribution-hypotheses", check_distribution_hypotheses),
    ("detailed-balance", check_detailed_balance),
    ("potential-consistency", check_potential_consistency),
    ("iid-determinism", check_iid_determinism),
    ("measure-normalization", check_measure_normalization),
    ("walker-conservation", check_walker_conservation),
    ("mc-vs-oracle", check_mc_vs_oracle),
    ("pathwise-duality", check_duality),
    ("concentration-monotonicity", check_concentration_monotonicity),
    ("peak-identity", check_peak_identity),
    ("route-equality", check_route_equality),
    ("monotone-convergence", check_monotone_convergence),
    ("argmax-sign", check_argmax_sign),
    ("corollary-proxy", check_corollary_proxy),
    ("harness-determinism", check_harness_determinism),
]


def run_suite() -> list[CheckResult]:
    results = []
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            detail = f"raised {type(exc).__name__}: {exc}"
        results.append(CheckResult(name, detail is None, detail or "",
                                   time.perf_counter() - t0))
    return results
