"""Command-line surface.

Subcommands: validate, simulate, sweep, reproduce-fig3, analyze, redesign,
schedule-check. Model arguments accept a file path or ``builtin:<name>`` for
a bundled model. CSVs use 6 significant digits and '\\n' line endings so a
fixed configuration produces byte-identical files everywhere; commands that
take --out also render a PNG figure next to the CSV unless --no-plot is set.

Exit codes:
    0   success
    1   other errors (bad redesign arguments, schedule regressions)
    3   the elimination sweep found no grid point where the reduced
        variant is slower with disjoint confidence intervals
    10  unreadable or malformed input (ParseError, MissingTiming)
    11  validation failures (model or schedule)
    12  a service center is saturated (Unstable)
    13  the analytic route needs a state-machine net (NotAStateMachine)
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .bcmp import mean_throughput_time, network_from_model
from .errors import (
    MissingTiming,
    NotAStateMachine,
    ParseError,
    RedesignLabError,
    Unstable,
    ValidationFailed,
)
from .model import build_counterexample
from .modelfile import emit_model, parse_model, parse_schedule
from .redesign import automate_task, eliminate_task, parallelize_task
from .schedule import project_schedule, schedule_throughput, validate_schedule
from .simulator import SweepRow, replicate, simulate_with_trace, sweep

DEFAULT_GRID = (6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0)
DEFAULT_REPS = 30
DEFAULT_HORIZON = 60_000.0  # 1000 hours in minutes


def _cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _print_table(headers: Sequence[str], rows: Sequence[Sequence]) -> None:
    body = [[_cell(value) for value in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in body:
        for i, text in enumerate(row):
            widths[i] = max(widths[i], len(text))
    print("  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip())
    for row in body:
        print("  ".join(text.rjust(widths[i]) if i else text.ljust(widths[i])
                        for i, text in enumerate(row)).rstrip())


def _write_csv(path: str | Path, headers: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(headers)
        for row in rows:
            writer.writerow([_cell(value) for value in row])


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    raw = os.environ.get("REDESIGNLAB_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise RedesignLabError(f"REDESIGNLAB_SEED must be an integer, got {raw!r}") from None


def _figure_path(out: str) -> Path:
    return Path(out).with_suffix(".png")


def cmd_validate(args: argparse.Namespace) -> int:
    model = parse_model(args.model)
    net = model.net
    print(f"ok: {len(net.places)} places, {len(net.transitions)} transitions, "
          f"{len(net.labelled)} labelled tasks, {len(model.classes)} case classes")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    model = parse_model(args.model)
    if args.variant == "eliminated":
        if not args.label:
            print("error: --variant eliminated needs --label", file=sys.stderr)
            return 1
        model = eliminate_task(model, args.label)
    if args.horizon is not None:
        model = replace(model, horizon=args.horizon)
    seed = _resolve_seed(args)
    summary = replicate(model, args.reps, seed)
    rows = [
        ("replications", float(summary.replications)),
        ("mean throughput (min)", summary.mean),
        ("95% half-width (min)", summary.ci_half_width),
        ("completed cases", float(summary.completed)),
        ("cases in flight", float(summary.in_flight)),
    ]
    rows.extend((f"class {name} mean (min)", summary.class_means[name])
                for name in sorted(summary.class_means))
    _print_table(("measure", "value"), rows)
    if args.trace:
        _, events = simulate_with_trace(model, seed)
        _write_csv(args.trace, ("time", "event", "case", "node"),
                   [(e.time, e.kind, e.case, e.node) for e in events])
        print(f"trace: {args.trace} ({len(events)} events)")
    if args.out:
        _write_csv(args.out, ("replication", "mean_throughput"),
                   list(enumerate(summary.rep_means)))
        print(f"csv: {args.out}")
        if not args.no_plot:
            from .plotting import render_replication_figure

            figure = render_replication_figure(summary, _figure_path(args.out))
            print(f"figure: {figure}")
    return 0


def _report_sweep(rows: Sequence[SweepRow], out: str | None, no_plot: bool) -> None:
    headers = ("interarrival", "mean_original", "ci_original",
               "mean_eliminated", "ci_eliminated", "flags")
    table = [(r.interarrival, r.mean_original, r.ci_original,
              r.mean_eliminated, r.ci_eliminated, ",".join(r.flags)) for r in rows]
    _print_table(headers, table)
    if out:
        _write_csv(out, headers, table)
        print(f"csv: {out}")
        if not no_plot:
            from .plotting import render_sweep_figure

            figure = render_sweep_figure(rows, _figure_path(out))
            print(f"figure: {figure}")


def _slowdown_exit(rows: Sequence[SweepRow], reps: int) -> int:
    if reps < 2:
        print("warning: need at least 2 replications for confidence intervals; "
              "slowdown check skipped")
        return 0
    for row in rows:
        if row.flags:
            continue
        if row.mean_eliminated - row.ci_eliminated > row.mean_original + row.ci_original:
            print(f"elimination is confidently slower at interarrival "
                  f"{row.interarrival:.6g} min")
            return 0
    print("no stable grid point shows a confidently slower eliminated variant")
    return 3


def cmd_sweep(args: argparse.Namespace) -> int:
    original = parse_model(args.model)
    eliminated = eliminate_task(original, args.label)
    if args.horizon is not None:
        original = replace(original, horizon=args.horizon)
        eliminated = replace(eliminated, horizon=args.horizon)
    grid = tuple(args.interarrival) if args.interarrival else DEFAULT_GRID
    rows = sweep(original, eliminated, grid, args.reps, _resolve_seed(args))
    _report_sweep(rows, args.out, args.no_plot)
    return 0


def cmd_reproduce_fig3(args: argparse.Namespace) -> int:
    horizon = args.horizon if args.horizon is not None else DEFAULT_HORIZON
    original = build_counterexample(eliminated=False, horizon=horizon)
    eliminated = build_counterexample(eliminated=True, horizon=horizon)
    grid = tuple(args.interarrival) if args.interarrival else DEFAULT_GRID
    rows = sweep(original, eliminated, grid, args.reps, _resolve_seed(args))
    _report_sweep(rows, args.out, args.no_plot)
    return _slowdown_exit(rows, args.reps)


def cmd_analyze(args: argparse.Namespace) -> int:
    model = parse_model(args.model)
    network = network_from_model(model, args.rate)
    result = mean_throughput_time(network)
    headers = ("center", "task", "arrival_rate", "utilization",
               "mean_wait", "mean_number")
    rows = list(result.rows())
    _print_table(headers, rows)
    print(f"external rate: {result.external_rate:.6g}/min")
    print(f"mean throughput time: {result.total:.6g} min")
    if args.out:
        _write_csv(args.out, headers, rows)
        print(f"csv: {args.out}")
    return 0


def cmd_redesign(args: argparse.Namespace) -> int:
    if args.action == "parallelize" and args.n < 1:
        print("error: --n must be at least 1", file=sys.stderr)
        return 1
    model = parse_model(args.model)
    if args.action == "eliminate":
        redesigned = eliminate_task(model, args.label)
    elif args.action == "automate":
        redesigned = automate_task(model, args.label, args.epsilon)
    else:
        redesigned = parallelize_task(model, args.label, args.n)
    text = emit_model(redesigned)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_schedule_check(args: argparse.Namespace) -> int:
    model = parse_model(args.model)
    schedule = parse_schedule(args.schedule, args.arrivals)
    report = validate_schedule(model, schedule)
    if not report.ok:
        print(report.summary(), file=sys.stderr)
        return 11
    print(f"ok: {len(schedule.entries)} entries over {len(schedule.arrivals)} cases")
    if args.label:
        projected = project_schedule(schedule, {args.label})
        reduced = eliminate_task(model, args.label)
        projected_report = validate_schedule(reduced, projected)
        if not projected_report.ok:
            print("projected schedule fails validation:", file=sys.stderr)
            print(projected_report.summary(), file=sys.stderr)
            return 11
        before = schedule_throughput(schedule)
        after = schedule_throughput(projected)
        regressed = sorted(c for c in before if after[c] > before[c] + 1e-9)
        mean_before = sum(before.values()) / len(before) if before else 0.0
        mean_after = sum(after.values()) / len(after) if after else 0.0
        print(f"projection without {args.label}: mean case throughput "
              f"{mean_before:.6g} -> {mean_after:.6g} min")
        if regressed:
            print(f"error: {len(regressed)} case(s) got slower: "
                  f"{', '.join(str(c) for c in regressed[:5])}", file=sys.stderr)
            return 1
    return 0


def _add_seed(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=None,
                     help="base random seed (default: REDESIGNLAB_SEED or 0)")


def _add_output(sub: argparse.ArgumentParser, default: str | None = None) -> None:
    sub.add_argument("--out", default=default, help="CSV output path")
    sub.add_argument("--no-plot", action="store_true",
                     help="skip the PNG figure next to the CSV")


def _add_model(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--model", required=True,
                     help="model file path, or builtin:<name> for a bundled model")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="redesignlab",
        description="Simulate and analyse timed process models under redesign steps.")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("validate", help="parse a model file and check its invariants")
    _add_model(sub)
    sub.set_defaults(func=cmd_validate)

    sub = commands.add_parser("simulate", help="replicate a simulation and summarize throughput")
    _add_model(sub)
    sub.add_argument("--variant", choices=("original", "eliminated"), default="original",
                     help="simulate the model as-is or with --label eliminated")
    sub.add_argument("--label", default=None, help="task label for --variant eliminated")
    sub.add_argument("--reps", type=int, default=DEFAULT_REPS)
    sub.add_argument("--horizon", type=float, default=None,
                     help="replication length in minutes (default: model value)")
    sub.add_argument("--trace", default=None, help="write a single-run event trace CSV")
    _add_seed(sub)
    _add_output(sub)
    sub.set_defaults(func=cmd_simulate)

    sub = commands.add_parser("sweep", help="compare a model against task elimination "
                                            "over an interarrival grid")
    _add_model(sub)
    sub.add_argument("--label", required=True, help="task to eliminate")
    sub.add_argument("--interarrival", type=float, action="append", default=None,
                     help="mean interarrival time in minutes (repeatable)")
    sub.add_argument("--reps", type=int, default=DEFAULT_REPS)
    sub.add_argument("--horizon", type=float, default=None)
    _add_seed(sub)
    _add_output(sub)
    sub.set_defaults(func=cmd_sweep)

    sub = commands.add_parser(
        "reproduce-fig3",
        help="run the bundled elimination counterexample over the default grid "
             "and verify the slowdown is visible")
    sub.add_argument("--interarrival", type=float, action="append", default=None)
    sub.add_argument("--reps", type=int, default=DEFAULT_REPS)
    sub.add_argument("--horizon", type=float, default=None,
                     help=f"replication length in minutes (default {DEFAULT_HORIZON:.0f})")
    _add_seed(sub)
    _add_output(sub, default="reproduce-fig3.csv")
    sub.set_defaults(func=cmd_reproduce_fig3)

    sub = commands.add_parser("analyze", help="exact mean throughput time for a "
                                              "state-machine model")
    _add_model(sub)
    sub.add_argument("--rate", type=float, required=True,
                     help="external arrival rate (cases per minute)")
    sub.add_argument("--out", default=None, help="CSV output path")
    sub.set_defaults(func=cmd_analyze)

    sub = commands.add_parser("redesign", help="apply a redesign step and emit the new model")
    _add_model(sub)
    sub.add_argument("--action", required=True,
                     choices=("eliminate", "automate", "parallelize"))
    sub.add_argument("--label", required=True, help="task to transform")
    sub.add_argument("--epsilon", type=float, default=0.0,
                     help="new deterministic duration for automate")
    sub.add_argument("--n", type=int, default=2, help="branch count for parallelize")
    sub.add_argument("--out", default=None, help="model output path (default: stdout)")
    sub.set_defaults(func=cmd_redesign)

    sub = commands.add_parser("schedule-check", help="validate a schedule CSV against "
                                                     "a model, optionally after elimination")
    _add_model(sub)
    sub.add_argument("--schedule", required=True,
                     help="CSV with columns case,task,resource,start,end")
    sub.add_argument("--arrivals", required=True, help="CSV with columns case,arrival")
    sub.add_argument("--label", default=None,
                     help="also project the schedule without this task and recheck")
    sub.set_defaults(func=cmd_schedule_check)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, MissingTiming) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 10
    except ValidationFailed as exc:
        print("error: validation failed", file=sys.stderr)
        print(exc.report.summary(), file=sys.stderr)
        return 11
    except Unstable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 12
    except NotAStateMachine as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 13
    except RedesignLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
