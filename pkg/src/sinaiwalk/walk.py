"""Quenched simulation of the nearest-neighbor chain and its local times.

One walk is strictly sequential, so the hot loop is a compiled kernel over a
contiguous two-sided window of sites; the window grows on demand and the
uniform variates come in blocks from a dedicated generator, which keeps a
run a pure function of (environment, walk seed, step count) no matter how
often the window grew or the blocks cycled.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from .environment import Environment, exact_fraction
from .errors import OutOfRangeError, TooLargeError

_UNIFORM_BLOCK = 1 << 20
_INITIAL_HALFWIDTH = 64


@dataclass(frozen=True, eq=False)
class LocalTimeTable:
    """Visit counts per site over the first n steps (the start site not counted)."""

    lo: int
    counts: np.ndarray
    n: int

    @classmethod
    def from_counts(cls, counts: dict[int, int], n: int | None = None) -> "LocalTimeTable":
        total = sum(counts.values())
        if n is None:
            n = total
        if n != total:
            raise OutOfRangeError(f"counts sum to {total}, not n = {n}")
        if any(v < 0 for v in counts.values()):
            raise OutOfRangeError("counts must be nonnegative")
        positive = {k: v for k, v in counts.items() if v > 0}
        if not positive:
            return cls(0, np.zeros(0, dtype=np.int64), n)
        lo, hi = min(positive), max(positive)
        arr = np.zeros(hi - lo + 1, dtype=np.int64)
        for k, v in positive.items():
            arr[k - lo] = v
        return cls(lo, arr, n)

    @property
    def hi(self) -> int:
        return self.lo + len(self.counts) - 1

    @property
    def visited_range(self) -> tuple[int, int] | None:
        nz = np.flatnonzero(self.counts)
        if len(nz) == 0:
            return None
        return (self.lo + int(nz[0]), self.lo + int(nz[-1]))

    def count(self, site: int) -> int:
        if self.lo <= site <= self.hi:
            return int(self.counts[site - self.lo])
        return 0

    def total(self) -> int:
        return int(self.counts.sum())

    def items(self):
        for i, v in enumerate(self.counts):
            if v > 0:
                yield self.lo + i, int(v)


@dataclass(frozen=True)
class Trajectory:
    """Local-time snapshots along one walk, one per checkpoint step."""

    checkpoint_steps: tuple[int, ...]
    snapshots: tuple[LocalTimeTable, ...]

    @property
    def final(self) -> LocalTimeTable:
        return self.snapshots[-1]


@njit(cache=True, nogil=True)
def _walk_kernel(alpha, counts, idx, u, start, budget):  # pragma: no cover - compiled
    i = start
    end = start + budget
    last = alpha.shape[0] - 1
    while i < end:
        if u[i] < alpha[idx]:
            idx += 1
        else:
            idx -= 1
        counts[idx] += 1
        i += 1
        if idx == 0 or idx == last:
            break
    return idx, i


def _snapshot(lo: int, counts: np.ndarray, n: int) -> LocalTimeTable:
    nz = np.flatnonzero(counts)
    if len(nz) == 0:
        return LocalTimeTable(0, np.zeros(0, dtype=np.int64), n)
    first, last = int(nz[0]), int(nz[-1])
    return LocalTimeTable(lo + first, counts[first:last + 1].copy(), n)


def simulate(env: Environment, n: int, walk_seed: int,
             checkpoints=()) -> Trajectory:
    """Run n steps from the origin and snapshot local times at checkpoints.

    Each step moves right with the quenched site probability.  A final
    snapshot at step n is always included.  Deterministic given
    (environment, walk_seed, n).
    """
    if n < 0:
        raise OutOfRangeError(f"step count must be >= 0, got {n}")
    cps = sorted(set(int(c) for c in checkpoints))
    if cps and (cps[0] < 1 or cps[-1] > n):
        raise OutOfRangeError(f"checkpoints must lie in [1, {n}]")
    if not cps or cps[-1] != n:
        cps.append(n)

    lo, hi = -_INITIAL_HALFWIDTH, _INITIAL_HALFWIDTH
    counts = np.zeros(hi - lo + 1, dtype=np.int64)
    alpha = env.alpha_block(lo, hi)
    idx = -lo

    rng = np.random.Generator(np.random.PCG64(walk_seed))
    u = rng.random(_UNIFORM_BLOCK)
    cursor = 0
    done = 0
    snapshots = []
    for target in cps:
        while done < target:
            if cursor == len(u):
                u = rng.random(_UNIFORM_BLOCK)
                cursor = 0
            budget = min(target - done, len(u) - cursor)
            idx, new_cursor = _walk_kernel(alpha, counts, idx, u, cursor, budget)
            done += new_cursor - cursor
            cursor = new_cursor
            if idx == 0 or idx == len(counts) - 1:
                span = hi - lo + 1
                if idx == 0:
                    new_lo = lo - span
                    counts = np.concatenate([np.zeros(span, dtype=np.int64), counts])
                    alpha = np.concatenate([env.alpha_block(new_lo, lo - 1), alpha])
                    idx += span
                    lo = new_lo
                else:
                    new_hi = hi + span
                    counts = np.concatenate([counts, np.zeros(span, dtype=np.int64)])
                    alpha = np.concatenate([alpha, env.alpha_block(hi + 1, new_hi)])
                    hi = new_hi
        snapshots.append(_snapshot(lo, counts, done))
    return Trajectory(tuple(cps), tuple(snapshots))


# ---------------------------------------------------------------------------
# replica ensembles at small n (the Monte Carlo side of the oracle checks)
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _ensemble_kernel(alpha, n, u, z_num, z_den, y_num, y_den,
                     lstar_out, z_out, y_out):  # pragma: no cover - compiled
    reps = lstar_out.shape[0]
    width = 2 * n + 1
    counts = np.zeros(width, np.int64)
    for rep in range(reps):
        for k in range(width):
            counts[k] = 0
        pos = n
        base = rep * n
        for i in range(n):
            if u[base + i] < alpha[pos]:
                pos += 1
            else:
                pos -= 1
            counts[pos] += 1
        peak = 0
        for k in range(width):
            if counts[k] > peak:
                peak = counts[k]
        lstar_out[rep] = peak
        for j in range(z_num.shape[0]):
            c = 0
            for k in range(width):
                if counts[k] * z_den[j] >= z_num[j] * n:
                    c += 1
            z_out[j, rep] = c
        for j in range(y_num.shape[0]):
            found = 0
            for r in range(n + 1):
                w = 2 * r + 1
                if w > width:
                    w = width
                s = 0
                for k in range(w):
                    s += counts[k]
                best = s
                for k in range(w, width):
                    s += counts[k] - counts[k - w]
                    if s > best:
                        best = s
                if best * y_den[j] >= y_num[j] * n:
                    found = r
                    break
            y_out[j, rep] = found
    return 0


def ensemble_functionals(env: Environment, n: int, replicas: int, seed: int,
                         deltas=(), betas=()) -> dict:
    """Local-time functionals over many independent short walks.

    Intended for oracle comparisons, so n must stay small (<= 64).  Returns
    per-replica arrays: "lstar", and one entry per threshold under "z" and
    "y", keyed by the exact fraction.
    """
    if not (1 <= n <= 64):
        raise TooLargeError(f"ensemble path length must be in [1, 64], got {n}")
    if replicas < 1:
        raise OutOfRangeError(f"need at least one replica, got {replicas}")
    deltas = [exact_fraction(d) for d in deltas]
    betas = [exact_fraction(b) for b in betas]
    alpha = env.alpha_block(-n, n)
    z_num = np.array([d.numerator for d in deltas], dtype=np.int64)
    z_den = np.array([d.denominator for d in deltas], dtype=np.int64)
    y_num = np.array([b.numerator for b in betas], dtype=np.int64)
    y_den = np.array([b.denominator for b in betas], dtype=np.int64)

    lstar = np.zeros(replicas, dtype=np.int64)
    z = np.zeros((len(deltas), replicas), dtype=np.int64)
    y = np.zeros((len(betas), replicas), dtype=np.int64)

    rng = np.random.Generator(np.random.PCG64(seed))
    chunk = 1 << 16
    start = 0
    while start < replicas:
        stop = min(start + chunk, replicas)
        u = rng.random((stop - start) * n)
        _ensemble_kernel(alpha, n, u, z_num, z_den, y_num, y_den,
                         lstar[start:stop], z[:, start:stop], y[:, start:stop])
        start = stop
    out = {"lstar": lstar, "z": {}, "y": {}}
    for j, d in enumerate(deltas):
        out["z"][d] = z[j]
    for j, b in enumerate(betas):
        out["y"][b] = y[j]
    return out
