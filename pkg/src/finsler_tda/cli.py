"""Command-line entry point: ``finsler-tda <subcommand> ...``.

Exit status is 0 on success, 1 when a checked property fails (the report is
printed) and 2 for usage or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from threadpoolctl import threadpool_limits

from . import io as fio
from .complexes import build_complex, inclusion_suite
from .errors import FinslerTDAError, InfiniteMismatch
from .geometry import ORIENTATIONS
from .metrics import distance_matrix, validate_metric
from .persistence import bottleneck_distance, compute_persistence
from .stability import stability_trial

OK, PROPERTY_FAILURE, USAGE_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_json(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{p} does not exist")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{p} is not valid JSON: {exc}") from None


def _write(path: Path, text: str, out) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(f"wrote {path}", file=out)


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate_metric(args, out) -> int:
    from .metrics import metric_from_config
    metric = metric_from_config(_read_json(args.metric))
    report = validate_metric(metric, samples=args.samples, seed=args.seed)
    print(report.summary(), file=out)
    return OK if report.passed else PROPERTY_FAILURE


def cmd_distance(args, out) -> int:
    from .metrics import metric_from_config
    metric = metric_from_config(_read_json(args.metric))
    cloud = fio.load_cloud(args.points).check(metric)
    D = distance_matrix(metric, cloud.points, args.orientation)
    if args.pairs:
        print("i,j,distance", file=out)
        for i in range(len(D)):
            for j in range(len(D)):
                if i != j:
                    print(f"{i},{j},{float(D[i, j])!r}", file=out)
    else:
        for row in D:
            print(" ".join(f"{x:.12g}" for x in row), file=out)
    return OK


def cmd_complex(args, out) -> int:
    run = fio.load_run_config(args.run)
    cx = build_complex(run.complex_kind, run.cloud, run.metric, run.max_dim)
    _write(run.output("complex", "complex.jsonl"), cx.to_jsonl(), out)
    print(f"{len(cx)} simplices ({run.complex_kind}, max_dim {run.max_dim})", file=out)
    return OK


def cmd_persistence(args, out) -> int:
    run = fio.load_run_config(args.run)
    cx = build_complex(run.complex_kind, run.cloud, run.metric, run.max_dim)
    dgm = compute_persistence(cx)
    _write(run.output("diagram_csv", "diagram.csv"), fio.diagram_to_csv(dgm), out)
    _write(run.output("diagram_json", "diagram.json"), fio.diagram_to_json(dgm) + "\n", out)
    if "diagram_svg" in run.outputs:
        _write(run.output("diagram_svg", "diagram.svg"), fio.diagram_svg(dgm), out)
    return OK


def cmd_bottleneck(args, out) -> int:
    for p in (args.a, args.b):
        if not Path(p).is_file():
            raise UsageError(f"{p} does not exist")
    a, b = fio.load_diagram(args.a), fio.load_diagram(args.b)
    try:
        d = bottleneck_distance(a, b, args.dim)
    except InfiniteMismatch:
        d = math.inf
    print("inf" if math.isinf(d) else f"{d:.12g}", file=out)
    return OK


def cmd_stability(args, out) -> int:
    run = fio.load_run_config(args.run)
    if args.trials < 1 or args.noise < 0:
        raise UsageError("--trials must be positive and --noise non-negative")
    records = []
    for t in range(args.trials):
        records.extend(stability_trial(run.cloud, run.metric, args.noise, run.complex_kind,
                                       run.max_dim, seed=run.seed + t))
    _write(run.output("stability", "stability.jsonl"),
           "".join(r.to_json() + "\n" for r in records), out)
    failed = [r for r in records if not r.passed]
    worst = max((r.d_b / r.gh_bound for r in records if r.gh_bound > 0), default=0.0)
    print(f"{len(records) - len(failed)}/{len(records)} records within d_b <= dis/2 "
          f"(worst ratio {worst:.4g})", file=out)
    return PROPERTY_FAILURE if failed else OK


def cmd_gen_circle(args, out) -> int:
    cfg = _read_json(args.config)
    circle = fio.CircleSpec.from_config(cfg.get("circle", cfg))
    text = fio.cloud_to_json(fio.gen_circle(circle)) + "\n"
    if args.output:
        _write(Path(args.output), text, out)
    else:
        out.write(text)
    return OK


def cmd_check_inclusions(args, out) -> int:
    run = fio.load_run_config(args.run)
    reports = inclusion_suite(run.cloud, run.metric, run.max_dim, run.epsilon_values())
    width = max(len(k) for k in reports)
    print(f"{'inclusion':<{width}}  result  checked", file=out)
    for name, rep in reports.items():
        status = "pass" if rep.passed else "FAIL"
        line = f"{name:<{width}}  {status:<6}  {rep.checked}"
        if not rep.passed:
            line += f"  counterexample {rep.counterexample}"
        print(line, file=out)
    return OK if all(r.passed for r in reports.values()) else PROPERTY_FAILURE


def cmd_plot_balls(args, out) -> int:
    run = fio.load_run_config(args.run)
    if not args.radius > 0:
        raise UsageError("--radius must be positive")
    polys = fio.ball_polylines(run.cloud, run.metric, args.radius, args.orientation)
    _write(run.output("polylines", "balls.csv"), fio.polylines_to_csv(polys), out)
    _write(run.output("svg", "balls.svg"), fio.balls_svg(run.cloud, polys), out)
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="finsler-tda", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=None,
                        help="cap on BLAS/OpenMP worker threads")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate-metric", help="check the Finsler axioms on samples")
    p.add_argument("metric")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_validate_metric)

    p = sub.add_parser("distance", help="pointwise quasi-distances between cloud points")
    p.add_argument("metric")
    p.add_argument("points")
    p.add_argument("--pairs", action="store_true", help="one CSV row per ordered pair")
    p.add_argument("--orientation", choices=ORIENTATIONS, default="forward")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("complex", help="build a filtration and write it as JSONL")
    p.add_argument("run")
    p.set_defaults(func=cmd_complex)

    p = sub.add_parser("persistence", help="write the persistence diagram as CSV and JSON")
    p.add_argument("run")
    p.set_defaults(func=cmd_persistence)

    p = sub.add_parser("bottleneck", help="bottleneck distance between two diagram files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--dim", type=int, required=True)
    p.set_defaults(func=cmd_bottleneck)

    p = sub.add_parser("stability", help="perturbation trials against the distortion bound")
    p.add_argument("run")
    p.add_argument("--noise", type=float, default=0.01)
    p.add_argument("--trials", type=int, default=10)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("gen-circle", help="equally spaced points on a circle in 3-space")
    p.add_argument("config")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen_circle)

    p = sub.add_parser("check-inclusions", help="table of complex inclusion checks")
    p.add_argument("run")
    p.set_defaults(func=cmd_check_inclusions)

    p = sub.add_parser("plot-balls", help="ball boundary polylines and an SVG")
    p.add_argument("run")
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--orientation", choices=ORIENTATIONS, default="forward")
    p.set_defaults(func=cmd_plot_balls)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "seed", "absent") is None:
            args.seed = fio.default_seed()
        if args.threads is not None and args.threads < 1:
            raise UsageError("--threads must be at least 1")
        with threadpool_limits(limits=args.threads):
            return args.func(args, out)
    except UsageError as exc:
        print(f"finsler-tda: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (fio.ConfigError, FinslerTDAError, ValueError) as exc:
        print(f"finsler-tda: error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
