"""Command-line interface.

Subcommands: `predict` (closed-form limits), `simulate` (seeded replicas to
CSV plus SVG figures), `sweep` (limit constants over a fraction range) and
`verify` (invariant suite; nonzero exit on failure).  Fractions on the
command line stay exact: "9/10" and "0.9" both mean nine tenths.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import theory
from .environment import exact_fraction, validate_distribution, EnvironmentDistribution
from .errors import SinaiWalkError
from .harness import ExperimentConfig, emit_csv, run_experiment
from .verify import run_suite


def _fractions(values) -> tuple[Fraction, ...]:
    out = []
    for v in values or []:
        out.extend(exact_fraction(tok) for tok in str(v).split(","))
    return tuple(out)


def _ints(values) -> tuple[int, ...]:
    out = []
    for v in values or []:
        out.extend(int(tok) for tok in str(v).split(","))
    return tuple(out)


def _fraction_range(spec: str) -> tuple[Fraction, ...]:
    """Inclusive range "a:b:step" evaluated in exact arithmetic."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise SinaiWalkError(f"range must look like a:b:step, got {spec!r}")
    a, b, step = (exact_fraction(p) for p in parts)
    if step <= 0 or b < a:
        raise SinaiWalkError(f"empty range {spec!r}")
    values = []
    v = a
    while v <= b:
        values.append(v)
        v += step
    return tuple(values)


def _add_env_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--env", default="valley-th1",
                        choices=["valley-th1", "valley-th2-plus", "valley-th2-minus",
                                 "iid", "constant"],
                        help="environment kind (default valley-th1)")
    parser.add_argument("--alpha-min", type=float, help="lower support extreme")
    parser.add_argument("--alpha-max", type=float, help="upper support extreme")
    parser.add_argument("--dist", help="law as a JSON document or a path to one")
    parser.add_argument("--g", type=int, default=0, help="plateau length for valley-th2")
    parser.add_argument("--p", type=float, default=0.5,
                        help="site probability for the constant environment")


def _add_stat_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--beta", action="append",
                        help="window mass fraction, exact (e.g. 9/10); repeatable")
    parser.add_argument("--delta", action="append",
                        help="heavy-site threshold, exact (e.g. 1/10); repeatable")
    parser.add_argument("--r", action="append", help="window radius; repeatable")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sinaiwalk",
        description="Local-time concentration of recurrent walks in random environments: "
                    "closed-form limits and seeded quenched simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="print the closed-form limit report")
    p.add_argument("--alpha-min", type=float, help="lower support extreme")
    p.add_argument("--alpha-max", type=float, help="upper support extreme")
    p.add_argument("--dist", help="law as a JSON document or a path to one")
    _add_stat_flags(p)
    p.add_argument("--json", action="store_true", help="print only the JSON document")

    s = sub.add_parser("simulate", help="run seeded replicas, write CSV and figures")
    _add_env_flags(s)
    _add_stat_flags(s)
    s.add_argument("--config", help="JSON config file; flags override its values")
    s.add_argument("--steps", type=int, help="walk length per replica")
    s.add_argument("--seed", type=int, help="base seed; replica i walks with seed+i")
    s.add_argument("--replicas", type=int, help="number of independent replicas")
    s.add_argument("--checkpoint-start", type=int, help="first checkpoint step")
    s.add_argument("--checkpoint-ratio", type=float, help="geometric checkpoint ratio")
    s.add_argument("--min-radius", type=int, help="smallest admissible window radius")
    s.add_argument("--workers", type=int, help="concurrent replica workers")
    s.add_argument("--out", help="CSV output path (figures land alongside)")
    s.add_argument("--no-figures", action="store_true", help="skip SVG rendering")

    w = sub.add_parser("sweep", help="tabulate limit constants over a range")
    w.add_argument("--alpha-min", type=float, help="lower support extreme")
    w.add_argument("--alpha-max", type=float, help="upper support extreme")
    w.add_argument("--dist", help="law as a JSON document or a path to one")
    w.add_argument("--beta", help="range a:b:step for the window fraction")
    w.add_argument("--delta", help="range a:b:step for the heavy-site threshold")
    w.add_argument("--out", help="CSV output path (default sweep.csv)")
    w.add_argument("--no-figures", action="store_true", help="skip SVG rendering")

    v = sub.add_parser("verify", help="run the invariant suite")
    return parser


def _params_from_args(args) -> theory.DecayParams:
    if args.dist:
        text = args.dist
        if not text.strip().startswith("{"):
            text = Path(text).read_text()
        law = EnvironmentDistribution.from_json(json.loads(text))
        return theory.DecayParams.from_extremes(validate_distribution(law))
    if args.alpha_min is None or args.alpha_max is None:
        raise SinaiWalkError("need --alpha-min and --alpha-max (or --dist)")
    return theory.DecayParams.from_bounds(args.alpha_min, args.alpha_max)


def cmd_predict(args) -> int:
    params = _params_from_args(args)
    report = theory.theory_report(params, betas=_fractions(args.beta),
                                  deltas=_fractions(args.delta), radii=_ints(args.r))
    if not args.json:
        print(report.format_table())
    print(report.to_json())
    return 0


def _config_from_args(args) -> ExperimentConfig:
    doc = {}
    if args.config:
        doc = json.loads(Path(args.config).read_text())
    if args.env == "valley-th2-plus":
        doc["env"] = {"kind": "valley-th2", "sign": "plus", "g": args.g}
    elif args.env == "valley-th2-minus":
        doc["env"] = {"kind": "valley-th2", "sign": "minus", "g": args.g}
    elif args.env == "constant":
        doc["env"] = {"kind": "constant", "p": args.p}
    elif args.env == "iid" or "env" not in doc:
        doc["env"] = {"kind": args.env if args.env != "iid" else "iid"}
    if args.dist:
        text = args.dist
        if not text.strip().startswith("{"):
            text = Path(text).read_text()
        doc["dist"] = json.loads(text)
    for key in ("alpha_min", "alpha_max", "steps", "seed", "replicas",
                "checkpoint_start", "checkpoint_ratio", "min_radius", "workers", "out"):
        value = getattr(args, key, None)
        if value is not None:
            doc[key] = value
    if args.beta:
        doc["beta"] = list(_fractions(args.beta))
    if args.delta:
        doc["delta"] = list(_fractions(args.delta))
    if args.r:
        doc["r"] = list(_ints(args.r))
    if "steps" not in doc:
        raise SinaiWalkError("need --steps (or a config file providing steps)")
    return ExperimentConfig.from_json_dict(
        {k: (str(v) if isinstance(v, Fraction) else v) for k, v in doc.items()}
        | {"beta": [str(b) for b in doc.get("beta", [])],
           "delta": [str(d) for d in doc.get("delta", [])]})


def cmd_simulate(args) -> int:
    config = _config_from_args(args)
    result = run_experiment(config)
    out = Path(config.out or "sinaiwalk_result.csv")
    emit_csv(result, out)
    print(f"wrote {out}")
    if not args.no_figures:
        from .plots import emit_all_svgs
        for path in emit_all_svgs(result, out):
            print(f"wrote {path}")
    if result.checkpoint_steps:
        final = result.values[:, -1, :]
        print(f"final checkpoint (n={result.checkpoint_steps[-1]}), "
              f"mean over {config.replicas} replicas:")
        for i, s in enumerate(result.stats):
            ref = result.theory_refs.get(s.name)
            note = f"  (limit {ref:.6g})" if ref is not None else ""
            print(f"  {s.name:<14} {final[:, i].mean():.6g}{note}")
    return 0


def cmd_sweep(args) -> int:
    if bool(args.beta) == bool(args.delta):
        raise SinaiWalkError("sweep needs exactly one of --beta a:b:step or --delta a:b:step")
    params = _params_from_args(args)
    out = Path(args.out or "sweep.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.beta:
        values = _fraction_range(args.beta)
        lines = ["beta,f_beta,f_simplified"]
        ys = []
        for b in values:
            f = theory.min_radius_for_fraction(b, params)
            fs = (theory.min_radius_symmetric(b, params.right_decay)
                  if 0 < params.right_decay and b < 1 else "")
            ys.append(float(f) if f != float("inf") else float("nan"))
            lines.append(f"{b},{f},{fs}")
        xlabel, ylabel = "beta", "f_beta"
    else:
        values = _fraction_range(args.delta)
        lines = ["delta,g_delta_plus,g_delta_minus,z_lower,z_upper"]
        ys = []
        for d in values:
            try:
                gp = theory.plateau_length(d, params, "plus")
                gm = theory.plateau_length(d, params, "minus")
                lo, hi = theory.heavy_site_limit_bounds(d, params)
                row = f"{d},{gp},{gm},{lo:.12g},{hi:.12g}"
                ys.append(float(gp))
            except SinaiWalkError:
                row = f"{d},,,,"
                ys.append(float("nan"))
            lines.append(row)
        xlabel, ylabel = "delta", "g_delta_plus"
    out.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")
    print(f"wrote {out}")
    if not args.no_figures:
        from .plots import emit_sweep_svg
        fig = out.with_suffix(".svg")
        emit_sweep_svg(values, ys, xlabel, ylabel, fig)
        print(f"wrote {fig}")
    return 0


def cmd_verify(args) -> int:
    results = run_suite()
    failed = 0
    for res in results:
        mark = "ok  " if res.passed else "FAIL"
        extra = f"  {res.detail}" if res.detail else ""
        print(f"{mark} {res.name:<28} ({res.seconds:.2f}s){extra}")
        failed += 0 if res.passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"predict": cmd_predict, "simulate": cmd_simulate,
                "sweep": cmd_sweep, "verify": cmd_verify}
    try:
        return handlers[args.command](args)
    except SinaiWalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
