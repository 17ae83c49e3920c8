"""Command-line entry point: ``relevo {relevance,sera,sweep,demo}``.

Errors exit non-zero with a single line ``relevo: error[CODE]: message`` on
stderr; CODE is one of E_USAGE, E_INPUT, E_IO.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

from . import io as rio
from .metrics import DEFAULT_STEP, PredictionSet, sera_all
from .models import default_learners, make_cv_plan, select_by_sera
from .relevance import (
    RelevanceFunction,
    anchors_of,
    auto_relevance,
    parse_points,
    uniform_relevance,
)
from .robustness import SweepConfig, run_sweeps
from .stats import Sample

EXIT_INPUT = 1
EXIT_USAGE = 2
EXIT_IO = 3

METHOD_ALIASES = {"conv": "convolution", "convolution": "convolution", "elastic": "elastic", "both": "both"}


class UsageError(Exception):
    pass


def bundled_dataset() -> Path:
    return Path(str(resources.files("relevo") / "data" / "synthetic_skewed.csv"))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _threads(value):
    if value is not None:
        if value < 1:
            raise UsageError(f"--threads must be >= 1, got {value}")
        return value
    env = os.environ.get("RELEVO_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"RELEVO_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise UsageError("RELEVO_THREADS must be >= 1")
        return n
    return 1


def _describe_anchors(f: RelevanceFunction) -> str:
    lines = []
    for tail in ("right", "left"):
        try:
            a = anchors_of(f, tail)
        except ValueError:
            continue
        lines.append(f"anchors[{tail}]: pi_min={a.pi_min:.6g} pi_max={a.pi_max:.6g} tail={a.tail}")
    return "\n".join(lines) if lines else "anchors: undefined (function never reaches both 0 and 1)"


def cmd_relevance(args) -> int:
    data = rio.read_dataset_csv(args.data, args.target) if args.data else None
    if args.auto:
        if data is None:
            raise UsageError("relevance --auto needs --data and --target")
        f = auto_relevance(Sample(data.y), args.centre)
    elif args.points:
        f = RelevanceFunction(parse_points(args.points))
    else:
        f = RelevanceFunction.load(args.from_file)

    if data is not None:
        lo, hi = float(data.y.min()), float(data.y.max())
    else:
        pad = 0.1 * float(f.knots[-1] - f.knots[0])
        lo, hi = float(f.knots[0]) - pad, float(f.knots[-1]) + pad
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    f.save(out / "relevance.json")
    rio.write_relevance_curve_csv(f, lo, hi, out / "relevance_curve.csv", n=args.samples)
    print("control points: " + ", ".join(f"({p.y:.6g}, {p.phi:g})" for p in f.points))
    print(_describe_anchors(f))
    print(f"wrote {out / 'relevance.json'} and {out / 'relevance_curve.csv'}")
    return 0


def _relevance_from_args(args) -> RelevanceFunction:
    if args.uniform:
        return uniform_relevance()
    if args.relevance:
        return RelevanceFunction.load(args.relevance)
    if args.points:
        return RelevanceFunction(parse_points(args.points))
    raise UsageError("no relevance source: give --relevance FILE, --points or --uniform")


def cmd_sera(args) -> int:
    preds = rio.read_predictions_csv(args.predictions)
    f = _relevance_from_args(args)
    curves = sera_all(preds, f, args.step)
    order = sorted(curves, key=lambda m: (curves[m].area, m))
    width = max(len(m) for m in order + ["model"])
    print(f"{'rank':>4}  {'model':<{width}}  {'sera':>14}")
    for r, m in enumerate(order, start=1):
        print(f"{r:>4}  {m:<{width}}  {curves[m].area:>14.6g}")
    if args.out:
        rio.write_curves_csv(curves, args.out)
        print(f"wrote {args.out}")
    return 0


def _explicit(parser: argparse.ArgumentParser, argv) -> set:
    """Destinations of options that appear literally on the command line."""
    given = set()
    for action in parser._actions:
        for opt in action.option_strings:
            if any(a == opt or a.startswith(opt + "=") for a in argv):
                given.add(action.dest)
    return given


def _merge_config(args, parser, argv, mapping) -> rio.RunConfig:
    base = rio.RunConfig.load(args.config).to_dict() if args.config else rio.RunConfig().to_dict()
    given = _explicit(parser, argv)
    for dest, key in mapping.items():
        if not args.config or dest in given:
            base[key] = getattr(args, dest)
    return rio.RunConfig.from_dict(base)


def _sweep_config(cfg: rio.RunConfig, y_train) -> SweepConfig:
    if cfg.half_range is not None:
        half = cfg.half_range
    else:
        half = SweepConfig.from_target(y_train, span=cfg.span).half_range
    return SweepConfig(method="convolution", steps=cfg.steps, half_range=half,
                       tail=cfg.tail, one_sided=cfg.one_sided)


def _print_sweeps(reports) -> None:
    for name, rep in reports.items():
        n_nb = sum(1 for s in rep.scenarios if s.spec.index != 0 and not s.spec.skipped)
        print(f"{name}: reference best={rep.reference_best} "
              f"rank_shift_probability={rep.rank_shift_probability:.3f} "
              f"({n_nb} neighbouring scenarios, delta={rep.config.delta:.6g})")
        for spec in rep.skipped:
            print(f"  skipped scenario {spec.index:+d} (offset {spec.offset:.6g}): {spec.skipped}")


SWEEP_KEYS = {
    "predictions": "predictions", "data": "data", "target": "target", "method": "method",
    "steps": "steps", "half_range": "half_range", "span": "span", "tail": "tail",
    "one_sided": "one_sided", "step": "sera_step", "out": "output_dir", "centre": "centre",
}


def cmd_sweep(args) -> int:
    if args.method is not None:
        args.method = METHOD_ALIASES[args.method]
    cfg = _merge_config(args, args.parser, args.argv, SWEEP_KEYS)
    if args.relevance:
        src = {"relevance": "file", "relevance_path": args.relevance, "points": None}
    elif args.points:
        src = {"relevance": "points", "relevance_path": None, "points": args.points}
    elif args.auto:
        src = {"relevance": "auto", "relevance_path": None, "points": None}
    elif args.config:
        src = {}
    else:
        raise UsageError("sweep needs a relevance source: --relevance FILE, --points SPEC or --auto")
    cfg = rio.RunConfig.from_dict({**cfg.to_dict(), **src})
    if not cfg.predictions:
        raise UsageError("sweep needs --predictions")
    threads = _threads(args.threads) if args.threads or os.environ.get("RELEVO_THREADS") else cfg.threads

    preds = rio.read_predictions_csv(cfg.predictions)
    train = rio.read_dataset_csv(cfg.data, cfg.target) if cfg.data and cfg.target else None
    y_train = train.y if train is not None else preds.y_true
    if cfg.relevance == "file":
        f = RelevanceFunction.load(cfg.relevance_path)
    elif cfg.relevance == "points":
        pts = cfg.points
        f = RelevanceFunction(parse_points(pts) if isinstance(pts, str) else pts)
    else:
        f = auto_relevance(Sample(y_train), cfg.centre)

    base = _sweep_config(cfg, y_train)
    reports = run_sweeps(preds, f, cfg.methods, base, cfg.sera_step, threads)
    rio.write_report(reports, cfg.output_dir)
    _print_sweeps(reports)
    print(f"wrote report to {cfg.output_dir}")
    return 0


def cmd_demo(args) -> int:
    data_path = args.data or bundled_dataset()
    data = rio.read_dataset_csv(data_path, args.target)
    f = auto_relevance(Sample(data.y))
    plan = make_cv_plan(data.n, folds=args.folds, seed=args.seed)
    n_train = data.n - max(fold.size for fold in plan.folds)

    selections = {}
    for learner in default_learners(n_train):
        sel = select_by_sera(data, learner, f, plan, step=args.step)
        selections[learner.name] = sel
    preds = PredictionSet(data.y, {name: s.oof for name, s in selections.items()})

    tail = args.tail
    if tail is None and len(f.points) == 3:
        tail = "right"
        print("note: two-tailed automatic relevance; sweeping the right tail (use --tail left to change)")
    base = SweepConfig.from_target(data.y, steps=args.steps, tail=tail)
    reports = run_sweeps(preds, f, ("convolution", "elastic"), base, args.step, _threads(args.threads))

    out = Path(args.out)
    rio.write_report(reports, out)
    f.save(out / "relevance.json")
    rio.write_predictions_csv(preds, out / "predictions.csv")
    sel_doc = {
        "seed": args.seed,
        "folds": args.folds,
        "learners": {
            name: {"params": s.params, "scores": [{"params": p, "sera": a} for p, a in s.scores]}
            for name, s in selections.items()
        },
    }
    (out / "selection.json").write_text(json.dumps(sel_doc, indent=2) + "\n", encoding="utf-8")

    print(f"dataset: {data_path} (n={data.n}, p={data.p}, target={data.target_name})")
    print("control points: " + ", ".join(f"({p.y:.6g}, {p.phi:g})" for p in f.points))
    for name, s in selections.items():
        best = min(a for _, a in s.scores)
        print(f"{name}: best params {s.params} out-of-fold SERA={best:.6g}")
    _print_sweeps(reports)
    print(f"wrote report to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    fmtc = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="relevo", description="Relevance-aware regression evaluation and ranking robustness sweeps.",
                     formatter_class=fmtc)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("relevance", help="build a relevance function", formatter_class=fmtc)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--auto", action="store_true", help="derive control points from the adjusted boxplot of --target")
    src.add_argument("--points", help='control points "y:phi[:dphi],..." e.g. "50:0,150:1"')
    src.add_argument("--from", dest="from_file", help="relevance JSON to re-sample")
    p.add_argument("--data", help="dataset CSV")
    p.add_argument("--target", help="target column of --data")
    p.add_argument("--centre", type=float, default=None, help="phi=0 location for --auto (default: median)")
    p.add_argument("--samples", type=int, default=500, help="points in the sampled y,phi curve")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_relevance)

    p = sub.add_parser("sera", help="score models with SERA", formatter_class=fmtc)
    p.add_argument("--predictions", required=True, help="CSV with y_true,<model>,... columns")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--relevance", help="relevance JSON")
    src.add_argument("--points", help='inline control points "y:phi,..."')
    src.add_argument("--uniform", action="store_true", help="phi = 1 everywhere (SERA equals SSE)")
    p.add_argument("--step", type=float, default=DEFAULT_STEP, help="t-grid step")
    p.add_argument("--out", default="sera_curves.csv", help="curves CSV (model,t,ser)")
    p.set_defaults(func=cmd_sera)

    d = rio.RunConfig()
    p = sub.add_parser("sweep", help="convolution/elastic ranking robustness sweep", formatter_class=fmtc)
    p.add_argument("--config", help="RunConfig JSON; explicit flags override it")
    p.add_argument("--predictions", help="CSV with y_true,<model>,... columns")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--relevance", help="relevance JSON")
    src.add_argument("--points", help='inline control points "y:phi,..."')
    src.add_argument("--auto", action="store_true", help="automatic relevance from the training target")
    p.add_argument("--data", help="training dataset CSV (target distribution for --auto and sigma)")
    p.add_argument("--target", help="target column of --data")
    p.add_argument("--centre", type=float, default=d.centre, help="phi=0 location for --auto (default: median)")
    p.add_argument("--method", choices=("conv", "elastic", "both"), default="both", help="sweep method(s)")
    p.add_argument("--steps", type=int, default=d.steps, help="scenarios per method (odd)")
    p.add_argument("--half-range", type=float, default=d.half_range,
                   help="sweep half-width in target units (default: from --span)")
    p.add_argument("--span", choices=("sigma", "range"), default=d.span,
                   help="half-width source when --half-range is absent")
    p.add_argument("--tail", choices=("right", "left"), default=d.tail, help="tail to sweep (two-tailed functions)")
    p.add_argument("--one-sided", action="store_true", help="offsets 0..half-range instead of symmetric")
    p.add_argument("--step", type=float, default=d.sera_step, help="SERA t-grid step")
    p.add_argument("--threads", type=int, default=None, help="worker threads (fallback: RELEVO_THREADS, then 1)")
    p.add_argument("--out", default=d.output_dir, help="report directory")
    p.set_defaults(func=cmd_sweep, parser=p)

    p = sub.add_parser("demo", help="end-to-end run with built-in baselines", formatter_class=fmtc)
    p.add_argument("--data", default=None, help="dataset CSV (default: bundled synthetic right-skewed data)")
    p.add_argument("--target", default="y", help="target column")
    p.add_argument("--seed", type=int, default=0, help="cross-validation seed")
    p.add_argument("--folds", type=int, default=10, help="cross-validation folds")
    p.add_argument("--steps", type=int, default=19, help="scenarios per method (odd)")
    p.add_argument("--tail", choices=("right", "left"), default=None, help="tail to sweep (two-tailed functions)")
    p.add_argument("--step", type=float, default=DEFAULT_STEP, help="SERA t-grid step")
    p.add_argument("--threads", type=int, default=None, help="worker threads (fallback: RELEVO_THREADS, then 1)")
    p.add_argument("--out", default="relevo-demo", help="report directory")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("relevo: a command is required (relevance, sera, sweep, demo)")
        args.argv = argv
        if args.command == "demo":
            rio.RunConfig(steps=args.steps, sera_step=args.step)  # validates before any work
        return args.func(args)
    except UsageError as exc:
        print(f"relevo: error[E_USAGE]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"relevo: error[E_INPUT]: {msg}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        msg = str(exc).replace("\n", " ")
        print(f"relevo: error[E_IO]: {msg}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
