"""Figure rendering for experiment results.

Figures go to self-contained SVG files next to the delimited output: one
line per replica against the step count on a log axis, with a horizontal
reference line at the closed-form limit when one exists.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import UnknownStatisticError  # noqa: E402
from .harness import AggregateResult  # noqa: E402

plt.rcParams["svg.hashsalt"] = "sinaiwalk"


def safe_stem(statistic: str) -> str:
    """Statistic token turned into a filesystem-friendly fragment."""
    return statistic.replace("/", "-")


def emit_svg(result: AggregateResult, statistic: str, path) -> Path:
    """Render one statistic's convergence picture to an SVG file."""
    names = [s.name for s in result.stats]
    if statistic not in names:
        raise UnknownStatisticError(
            f"no statistic named {statistic!r}; available: {', '.join(names)}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    matrix = result.stat_values(statistic)
    steps = result.checkpoint_steps
    for rep in range(matrix.shape[0]):
        ax.plot(steps, matrix[rep], lw=0.9, alpha=0.7, color="tab:blue")
    ref = result.theory_refs.get(statistic)
    if ref is not None:
        ax.axhline(ref, color="tab:red", lw=1.2, ls="--", label=f"limit {ref:.6g}")
        ax.legend(loc="best", fontsize=8)
    if steps:
        ax.set_xscale("log")
    ax.set_xlabel("step n (log scale)")
    ax.set_ylabel(statistic)
    ax.set_title(f"{statistic} per replica at geometric checkpoints")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def emit_all_svgs(result: AggregateResult, csv_path) -> list[Path]:
    """One figure per statistic, named after the CSV they accompany."""
    csv_path = Path(csv_path)
    written = []
    for s in result.stats:
        target = csv_path.with_name(f"{csv_path.stem}_{safe_stem(s.name)}.svg")
        written.append(emit_svg(result, s.name, target))
    return written


def emit_sweep_svg(xs, ys, xlabel: str, ylabel: str, path, title: str | None = None) -> Path:
    """Staircase figure for a theory sweep."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.step([float(x) for x in xs], ys, where="post", color="tab:blue")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path
