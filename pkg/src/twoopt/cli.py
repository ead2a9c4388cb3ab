"""``twoopt`` command line: instance generation, best-move benchmarks, convergence, validation, fits."""
from __future__ import annotations

import argparse
import contextlib
import datetime as _dt
import sys
from pathlib import Path

from . import __version__, analysis
from .experiments import (AGGREGATE_COLUMNS, ALGORITHMS, CONVERGE_COLUMNS, VALIDATE_COLUMNS,
                          ExperimentPlan, PlanError, aggregate, aggregate_rows, read_csv,
                          run_converge, run_trials, run_validate, trial_columns, trial_rows,
                          write_csv)
from .instance import gen_euclidean, gen_uniform, write_snapshot
from .search import SearchVariant
from .tour import random_tour, write_tour


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _variant(text: str) -> SearchVariant:
    try:
        return SearchVariant.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _add_plan_args(p: argparse.ArgumentParser, sizes: str) -> None:
    p.add_argument("--dist", choices=("uniform", "euclidean", "tsplib"), default="uniform")
    p.add_argument("--tsplib", metavar="FILE", help="TSPLIB file (implies --dist tsplib)")
    p.add_argument("--sizes", type=_int_list, default=_int_list(sizes))
    p.add_argument("--instances", type=int, default=10, help="instances per size")
    p.add_argument("--tours", type=int, default=10, help="random tours per instance")
    p.add_argument("--alpha", type=float, default=None,
                   help="threshold constant (default 1.89 uniform, 2.5 euclidean)")
    p.add_argument("--delta", type=float, default=None,
                   help="absolute threshold for the fixed-threshold search (overrides --alpha)")
    p.add_argument("--variant", type=_variant, default=SearchVariant(),
                   help="comma list of strong,dedup")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
    p.add_argument("--no-header-timestamp", action="store_true",
                   help="omit the '# generated ...' first line")


def _plan(args, **extra) -> ExperimentPlan:
    dist = "tsplib" if args.tsplib else args.dist
    return ExperimentPlan(distribution=dist, sizes=args.sizes, instances_per_size=args.instances,
                          tours_per_instance=args.tours, variant=args.variant, alpha=args.alpha,
                          delta=args.delta, seed=args.seed, tsplib_path=args.tsplib,
                          workers=args.workers, **extra)


def _stamp(args) -> str | None:
    if args.no_header_timestamp:
        return None
    now = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
    return f"generated by twoopt {__version__} at {now}"


@contextlib.contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            yield fh


def cmd_gen(args) -> int:
    if len(args.sizes) != 1:
        raise PlanError("gen takes exactly one size")
    n = args.sizes[0]
    seed = [args.seed, n, 0, 1]
    inst = gen_uniform(n, seed) if args.dist == "uniform" else gen_euclidean(n, seed)
    with _open_out(args.out) as fh:
        write_snapshot(inst, fh)
    if args.tour_out:
        with _open_out(args.tour_out) as fh:
            write_tour(random_tour(n, [args.seed, n, 0, 2, 1]), fh)
    return 0


def cmd_best_move(args) -> int:
    plan = _plan(args, algorithms=tuple(args.algos), timing=args.timing)
    trials = run_trials(plan)
    aggs = aggregate(plan, trials)
    stamp = _stamp(args)
    agg_path = args.agg_out
    if agg_path is None and args.out != "-":
        out = Path(args.out)
        agg_path = str(out.with_name(out.stem + "_agg" + out.suffix))
    with _open_out(args.out) as fh:
        write_csv(fh, trial_columns(plan), trial_rows(plan, trials), stamp)
        if agg_path is None:
            fh.write("\n")
            write_csv(fh, AGGREGATE_COLUMNS, aggregate_rows(plan, aggs))
    if agg_path is not None:
        with _open_out(agg_path) as fh:
            write_csv(fh, AGGREGATE_COLUMNS, aggregate_rows(plan, aggs), stamp)
    return 0


def cmd_converge(args) -> int:
    plan = _plan(args, betas=args.beta)
    sink = None
    if args.trace_dir:
        trace_dir = Path(args.trace_dir)
        trace_dir.mkdir(parents=True, exist_ok=True)

        def sink(run):
            tag = "ce" if run.beta is None else f"hybrid-b{run.beta:g}"
            path = trace_dir / f"trace_n{run.n}_i{run.instance}_t{run.tour}_{tag}.csv"
            with open(path, "w", newline="") as fh:
                run.trace.write_csv(fh)

    rows = run_converge(plan, sink)
    with _open_out(args.out) as fh:
        write_csv(fh, CONVERGE_COLUMNS, rows, _stamp(args))
    return 0


def cmd_validate(args) -> int:
    plan = _plan(args)
    rows = run_validate(plan, tail_samples=args.tail_samples)
    with _open_out(args.out) as fh:
        write_csv(fh, VALIDATE_COLUMNS, rows, _stamp(args))
    return 0 if all(row[-1] == 1 for row in rows) else 1


def cmd_fit(args) -> int:
    rows = read_csv(args.input)
    if not rows:
        raise PlanError(f"{args.input}: no aggregate rows")
    out_rows = []
    for dist in sorted({r["dist"] for r in rows}):
        group = [r for r in rows if r["dist"] == dist]
        for algo in ALGORITHMS:
            pts = [(float(r["n"]), float(r[algo])) for r in group if r.get(algo)]
            if not pts:
                continue
            if len({p[0] for p in pts}) < 3:
                raise PlanError(f"{dist}/{algo}: need at least 3 sizes to fit, got {len(pts)}")
            fit = analysis.power_fit(pts, exponent=args.exponent)
            out_rows.append([dist, algo, repr(fit.a), repr(fit.b), repr(fit.residual)])
    with _open_out(args.out) as fh:
        write_csv(fh, ["dist", "algo", "a", "b", "residual"], out_rows, _stamp(args))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twoopt", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a random instance as u,v,cost rows")
    _add_plan_args(p, "100")
    p.add_argument("--tour-out", help="also write a random tour, one node per line")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("best-move", help="moves evaluated to find the best move on random tours")
    _add_plan_args(p, "1000,2000,4000,8000")
    p.add_argument("--algos", type=lambda s: [a for a in s.split(",") if a],
                   default=list(ALGORITHMS), help="subset of ce,greedy,blind,fixed")
    p.add_argument("--agg-out", help="aggregate CSV path (default: <out>_agg.csv)")
    p.add_argument("--timing", action="store_true",
                   help="add a wall-clock seconds column (breaks byte-identical reruns)")
    p.set_defaults(func=cmd_best_move)

    p = sub.add_parser("converge", help="CE vs hybrid local-search convergence")
    _add_plan_args(p, "1000")
    p.add_argument("--beta", type=_float_list, default=(0.3, 0.4, 0.5))
    p.add_argument("--trace-dir", help="write per-iteration traces here")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("validate", help="run the statistical validators")
    _add_plan_args(p, "2000")
    p.add_argument("--tail-samples", type=int, default=10**7)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("fit", help="power-law fits of best-move aggregates")
    p.add_argument("--in", dest="input", required=True, help="aggregate CSV from best-move")
    p.add_argument("--exponent", type=float, default=None, help="fix the exponent, fit only a")
    p.add_argument("--out", default="-")
    p.add_argument("--no-header-timestamp", action="store_true")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PlanError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
