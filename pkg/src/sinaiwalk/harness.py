"""Experiment orchestration: seeded replicas, checkpoints, aggregation, CSV.

A run is a pure function of its configuration: replica i walks with seed
(base seed + i), checkpoints follow a geometric schedule, and limsup/liminf
over the step count are approximated by running max/min over checkpoints
within each replica.  Aggregation is a deterministic fold in replica order,
so worker scheduling cannot change any output byte.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import concentration as conc
from . import theory
from .environment import (
    EnvironmentDistribution,
    SupportExtremes,
    environment_from_json,
    exact_fraction,
    validate_distribution,
)
from .errors import NoValleyError, DegenerateSupportError, OutOfRangeError, UnknownStatisticError
from .walk import simulate


@dataclass(frozen=True)
class StatSpec:
    """One reported statistic: a CSV column and its limit reference."""

    name: str
    kind: str          # "lstar" | "R" | "Y" | "Z"
    param: object = None


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run depends on; JSON documents mirror the field names."""

    env: dict
    steps: int
    replicas: int = 1
    seed: int = 0
    alpha_min: float | None = None
    alpha_max: float | None = None
    dist: dict | None = None
    checkpoint_start: int = 1000
    checkpoint_ratio: float = 2.0
    beta: tuple[Fraction, ...] = ()
    delta: tuple[Fraction, ...] = ()
    r: tuple[int, ...] = ()
    min_radius: int = 0
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        if self.steps < 0:
            raise OutOfRangeError(f"steps must be >= 0, got {self.steps}")
        if self.replicas < 1:
            raise OutOfRangeError(f"replicas must be >= 1, got {self.replicas}")
        if self.checkpoint_start < 1:
            raise OutOfRangeError(f"checkpoint_start must be >= 1, got {self.checkpoint_start}")
        if not self.checkpoint_ratio > 1.0:
            raise OutOfRangeError(f"checkpoint_ratio must exceed 1, got {self.checkpoint_ratio}")
        if self.workers < 1:
            raise OutOfRangeError(f"workers must be >= 1, got {self.workers}")
        for b in self.beta:
            if not (0 <= b <= 1):
                raise OutOfRangeError(f"beta must lie in [0, 1], got {b}")
        for d in self.delta:
            if d <= 0:
                raise OutOfRangeError(f"delta must be positive, got {d}")
        for r in self.r:
            if r < 0:
                raise OutOfRangeError(f"radius must be >= 0, got {r}")

    def to_json_dict(self) -> dict:
        doc = {
            "env": self.env,
            "steps": self.steps,
            "replicas": self.replicas,
            "seed": self.seed,
            "checkpoint_start": self.checkpoint_start,
            "checkpoint_ratio": self.checkpoint_ratio,
            "beta": [str(b) for b in self.beta],
            "delta": [str(d) for d in self.delta],
            "r": list(self.r),
            "min_radius": self.min_radius,
            "workers": self.workers,
        }
        if self.alpha_min is not None:
            doc["alpha_min"] = self.alpha_min
        if self.alpha_max is not None:
            doc["alpha_max"] = self.alpha_max
        if self.dist is not None:
            doc["dist"] = self.dist
        if self.out is not None:
            doc["out"] = self.out
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ExperimentConfig":
        return cls(
            env=doc.get("env", {"kind": "valley-th1"}),
            steps=int(doc["steps"]),
            replicas=int(doc.get("replicas", 1)),
            seed=int(doc.get("seed", 0)),
            alpha_min=doc.get("alpha_min"),
            alpha_max=doc.get("alpha_max"),
            dist=doc.get("dist"),
            checkpoint_start=int(doc.get("checkpoint_start", 1000)),
            checkpoint_ratio=float(doc.get("checkpoint_ratio", 2.0)),
            beta=tuple(exact_fraction(b) for b in doc.get("beta", [])),
            delta=tuple(exact_fraction(d) for d in doc.get("delta", [])),
            r=tuple(int(r) for r in doc.get("r", [])),
            min_radius=int(doc.get("min_radius", 0)),
            workers=int(doc.get("workers", 1)),
            out=doc.get("out"),
        )


def checkpoint_schedule(steps: int, start: int, ratio: float) -> tuple[int, ...]:
    """Geometric checkpoints within [1, steps], always ending at steps."""
    if steps <= 0:
        return ()
    points = []
    v = start
    while v < steps:
        if v >= 1:
            points.append(v)
        v = max(int(math.ceil(v * ratio)), v + 1)
    points.append(steps)
    return tuple(points)


def resolve_environment(config: ExperimentConfig):
    """Build the environment and, when defined, its support extremes."""
    law = None
    if config.dist is not None:
        law = EnvironmentDistribution.from_json(config.dist)
    elif (config.alpha_min is not None and config.alpha_max is not None
          and config.env.get("kind") == "iid"):
        law = EnvironmentDistribution.balanced_two_point(config.alpha_min, config.alpha_max)
    extremes = None
    if law is not None:
        extremes = validate_distribution(law)
    elif config.alpha_min is not None and config.alpha_max is not None:
        extremes = SupportExtremes.from_bounds(config.alpha_min, config.alpha_max)
    env = environment_from_json(config.env, extremes=extremes, dist=law, seed=config.seed)
    return env, extremes


def statistics_for(config: ExperimentConfig) -> tuple[StatSpec, ...]:
    specs = [StatSpec("lstar_over_n", "lstar")]
    specs += [StatSpec(f"R_{r}", "R", int(r)) for r in config.r]
    specs += [StatSpec(f"Y_{b}", "Y", b) for b in config.beta]
    specs += [StatSpec(f"Z_{d}", "Z", d) for d in config.delta]
    return tuple(specs)


@dataclass(frozen=True, eq=False)
class AggregateResult:
    """Per-replica, per-checkpoint statistics with running-extreme proxies."""

    config: ExperimentConfig
    checkpoint_steps: tuple[int, ...]
    stats: tuple[StatSpec, ...]
    values: np.ndarray        # (replicas, checkpoints, stats)
    running_max: np.ndarray
    running_min: np.ndarray
    theory: "theory.TheoryReport | None"
    theory_refs: dict

    def stat_index(self, name: str) -> int:
        for i, s in enumerate(self.stats):
            if s.name == name:
                return i
        raise UnknownStatisticError(f"no statistic named {name!r}")

    def stat_values(self, name: str) -> np.ndarray:
        """(replicas, checkpoints) matrix for one statistic."""
        return self.values[:, :, self.stat_index(name)]

    def summary(self) -> dict:
        """Cross-replica mean and quantiles per (statistic, checkpoint)."""
        out = {}
        for i, s in enumerate(self.stats):
            v = self.values[:, :, i]
            out[s.name] = {
                "mean": v.mean(axis=0) if v.size else np.zeros(0),
                "median": np.quantile(v, 0.5, axis=0) if v.size else np.zeros(0),
                "q05": np.quantile(v, 0.05, axis=0) if v.size else np.zeros(0),
                "q95": np.quantile(v, 0.95, axis=0) if v.size else np.zeros(0),
            }
        return out


def _theory_refs(stats, extremes) -> tuple["theory.TheoryReport | None", dict]:
    refs = {s.name: None for s in stats}
    if extremes is None:
        return None, refs
    params = theory.DecayParams.from_extremes(extremes)
    betas = [s.param for s in stats if s.kind == "Y"]
    deltas = [s.param for s in stats if s.kind == "Z"]
    radii = [s.param for s in stats if s.kind == "R"]
    report = theory.theory_report(params, betas=betas, deltas=deltas, radii=radii)
    for s in stats:
        if s.kind == "lstar":
            refs[s.name] = report.c1
        elif s.kind == "R":
            refs[s.name] = dict(report.g_profile)[s.param]
        elif s.kind == "Y":
            f = dict(report.f_beta)[s.param]
            refs[s.name] = None if f == math.inf else float(f)
        elif s.kind == "Z":
            g = dict(report.g_delta)[s.param]
            refs[s.name] = None if g is None else float(g)
    return report, refs


def _replica_rows(env, steps, walk_seed, cps, stats, min_radius) -> np.ndarray:
    traj = simulate(env, steps, walk_seed, cps)
    rows = np.empty((len(traj.checkpoint_steps), len(stats)), dtype=np.float64)
    for ci, table in enumerate(traj.snapshots):
        for si, s in enumerate(stats):
            if s.kind == "lstar":
                rows[ci, si] = conc.max_site_visits(table) / table.n
            elif s.kind == "R":
                rows[ci, si] = float(conc.best_window_fraction(table, s.param))
            elif s.kind == "Y":
                rows[ci, si] = conc.concentration_radius(table, s.param, min_radius)
            else:
                rows[ci, si] = conc.heavy_site_count(table, s.param)
    return rows


def run_experiment(config: ExperimentConfig) -> AggregateResult:
    """Execute all replicas and aggregate; deterministic given the config."""
    env, extremes = resolve_environment(config)
    cps = checkpoint_schedule(config.steps, config.checkpoint_start, config.checkpoint_ratio)
    stats = statistics_for(config)
    theory_report, refs = _theory_refs(stats, extremes)

    values = np.zeros((config.replicas, len(cps), len(stats)), dtype=np.float64)
    if cps:
        seeds = [config.seed + i for i in range(config.replicas)]
        worker = lambda s: _replica_rows(env, config.steps, s, cps, stats, config.min_radius)
        if config.workers > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                rows = list(pool.map(worker, seeds))
        else:
            rows = [worker(s) for s in seeds]
        for i, block in enumerate(rows):
            values[i] = block

    running_max = np.maximum.accumulate(values, axis=1) if values.size else values.copy()
    running_min = np.minimum.accumulate(values, axis=1) if values.size else values.copy()
    return AggregateResult(config=config, checkpoint_steps=cps, stats=stats,
                           values=values, running_max=running_max,
                           running_min=running_min, theory=theory_report,
                           theory_refs=refs)


def emit_csv(result: AggregateResult, path) -> Path:
    """One row per (replica, checkpoint); numbers carry 12 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["replica,step," + ",".join(s.name for s in result.stats)]
    for rep in range(result.values.shape[0]):
        for ci, step in enumerate(result.checkpoint_steps):
            cells = [f"{v:.12g}" for v in result.values[rep, ci]]
            lines.append(f"{rep},{step}," + ",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")
    return path
