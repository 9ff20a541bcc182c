"""Offline schedules for a net's cases, their validation, and projection.

A schedule fixes who does what when: one entry per executed task with its
case, resource, start, and end. Feasibility does not require FiFo order or
greedy starts; resources may deliberately delay one case to work on
another. What it does require: no resource works on two entries at once,
nothing starts before its case arrives, and a task never starts before the
tasks that precede it in the net (for that case) have finished. Entries on
parallel branches may overlap.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace

from .errors import UnknownCase
from .model import SimulationModel
from .net import CaseId, ValidationReport, Violation

_TIME_TOL = 1e-9


@dataclass(frozen=True)
class ScheduleEntry:
    case: CaseId
    task: str
    resource: str
    start: float
    end: float


@dataclass(frozen=True)
class Schedule:
    entries: tuple[ScheduleEntry, ...]
    arrivals: dict[CaseId, float]


def _label_reachability(model: SimulationModel) -> dict[str, set[str]]:
    """For each task label, the labels reachable from it through the net."""
    net = model.net
    succ: dict[str, list[str]] = {}
    for node in net.places:
        succ[node] = list(net.consumers[node])
    for node in net.transitions:
        succ[node] = list(net.postset[node])
    by_label = {}
    for tid in net.transitions:
        label = net.transitions[tid].label
        if label is not None:
            by_label.setdefault(label, []).append(tid)
    reach: dict[str, set[str]] = {}
    for label, tids in by_label.items():
        seen: set[str] = set()
        frontier = deque()
        for tid in tids:
            frontier.extend(net.postset[tid])
        while frontier:
            node = frontier.popleft()
            if node in seen:
                continue
            seen.add(node)
            frontier.extend(succ.get(node, ()))
        reach[label] = {
            net.transitions[n].label  # type: ignore[misc]
            for n in seen
            if n in net.transitions and net.transitions[n].label is not None
        }
    return reach


def validate_schedule(model: SimulationModel, schedule: Schedule) -> ValidationReport:
    """Check a schedule against the net and the resource capacity of one.

    Violations are reported as data. Delayed starts are fine; overlap on a
    resource, starting before arrival, unknown cases or tasks, and starting
    a task before its net predecessors for the same case are not.
    """
    out: list[Violation] = []
    reach = _label_reachability(model)
    known_tasks = set(reach)

    for i, entry in enumerate(schedule.entries):
        where = f"entry {i} ({entry.case}/{entry.task})"
        if entry.end < entry.start - _TIME_TOL:
            out.append(Violation("entry-times", f"{where} ends before it starts", (str(entry.case), entry.task)))
        if entry.case not in schedule.arrivals:
            out.append(Violation("unknown-case", f"{where} has no recorded arrival", (str(entry.case),)))
        elif entry.start < schedule.arrivals[entry.case] - _TIME_TOL:
            out.append(Violation("before-arrival", f"{where} starts before the case arrives", (str(entry.case), entry.task)))
        if entry.task not in known_tasks:
            out.append(Violation("unknown-task", f"{where} references a task the net does not have", (entry.task,)))

    by_resource: dict[str, list[ScheduleEntry]] = {}
    for entry in schedule.entries:
        by_resource.setdefault(entry.resource, []).append(entry)
    for resource, entries in sorted(by_resource.items()):
        entries.sort(key=lambda e: (e.start, e.end))
        for previous, current in zip(entries, entries[1:]):
            if current.start < previous.end - _TIME_TOL:
                out.append(Violation(
                    "resource-overlap",
                    f"resource {resource} works on {previous.case}/{previous.task} "
                    f"and {current.case}/{current.task} at once",
                    (resource, str(previous.case), str(current.case)),
                ))

    by_case: dict[CaseId, list[ScheduleEntry]] = {}
    for entry in schedule.entries:
        by_case.setdefault(entry.case, []).append(entry)
    for case, entries in by_case.items():
        for first in entries:
            followers = reach.get(first.task)
            if followers is None:
                continue
            for second in entries:
                if second is first or second.task not in followers:
                    continue
                if second.task == first.task:
                    continue
                # second comes after first in the net, so it must wait for it
                if first.task in reach.get(second.task, set()):
                    continue  # mutual reachability (cycle): order is not forced
                if second.start < first.end - _TIME_TOL:
                    out.append(Violation(
                        "precedence",
                        f"case {case}: {second.task} starts before {first.task} ends",
                        (str(case), first.task, second.task),
                    ))
    return ValidationReport(tuple(out))


def project_schedule(schedule: Schedule, eliminated: set[str] | frozenset[str]) -> Schedule:
    """Drop entries of eliminated tasks; everything else keeps its times.

    The remaining entries were feasible before removing work and stay
    feasible after, so a valid schedule projects to a valid schedule for
    the reduced model and no case finishes later than it did.
    """
    kept = tuple(e for e in schedule.entries if e.task not in eliminated)
    return replace(schedule, entries=kept)


def schedule_throughput(schedule: Schedule) -> dict[CaseId, float]:
    """Per-case throughput time: last entry end minus arrival.

    Cases with an arrival but no entries finished the moment they arrived;
    entries for unrecorded cases raise UnknownCase.
    """
    for entry in schedule.entries:
        if entry.case not in schedule.arrivals:
            raise UnknownCase(f"case {entry.case!r} has no recorded arrival")
    out: dict[CaseId, float] = {case: 0.0 for case in schedule.arrivals}
    for entry in schedule.entries:
        arrival = schedule.arrivals[entry.case]
        out[entry.case] = max(out[entry.case], entry.end - arrival)
    return out
