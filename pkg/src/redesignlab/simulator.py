"""Seeded discrete-event simulation of timed Petri-net models.

Semantics: every labelled task owns a FiFo queue and a fixed number of
servers; silent transitions fire instantaneously; AND-joins only combine
tokens of the same case. Simultaneous events are ordered by (time, kind,
sequence number) with arrivals before service completions, and all events
at one instant are drained before idle servers pick their next case, so a
queue is served strictly by (enqueue time, case arrival sequence).

Every run is a pure function of (model, seed). Randomness is split into one
named stream per stochastic source (the arrival process, each task, each
choice place), so model variants compared under the same seed see the same
arrivals and the same routing decisions.
"""

from __future__ import annotations

import math
import random
from bisect import insort
from collections import deque
from dataclasses import dataclass, replace
from heapq import heappop, heappush
from statistics import fmean, stdev
from typing import NamedTuple

from scipy import stats as _scipy_stats

from .errors import InvalidModel
from .model import Deterministic, Poisson, SimulationModel, validate_model

_ARRIVAL = 0
_COMPLETION = 1

UNSTABLE_FLAG = "unstable"


@dataclass(frozen=True)
class CaseRecord:
    """One case: its class, when it arrived, and when it left (None = in flight)."""

    case: int
    case_class: str | None
    arrival: float
    completion: float | None

    @property
    def throughput(self) -> float | None:
        if self.completion is None:
            return None
        return self.completion - self.arrival


class TraceEvent(NamedTuple):
    time: float
    kind: str
    case: int
    node: str


@dataclass(frozen=True)
class ReplicationSummary:
    """Replication means and their Student-t confidence interval.

    ``mean`` is the average of per-replication means; ``ci_half_width`` is
    the 95% half-width over replications (0 by convention for a single
    replication). Replication means are NaN for replications that completed
    no case at all; those are excluded from the aggregate.
    """

    replications: int
    rep_means: tuple[float, ...]
    mean: float
    ci_half_width: float
    class_means: dict[str, float]
    completed: int
    in_flight: int


@dataclass(frozen=True)
class SweepRow:
    interarrival: float
    mean_original: float
    ci_original: float
    mean_eliminated: float
    ci_eliminated: float
    flags: tuple[str, ...] = ()


class _Run:
    """One simulation run. Build, call run(), then read records/trace."""

    def __init__(self, model: SimulationModel, seed: int, collect_trace: bool = False):
        net = model.net
        self.model = model
        self.horizon = float(model.horizon)
        self.trace: list[TraceEvent] | None = [] if collect_trace else None

        self.preset = net.preset
        self.postset = net.postset
        self.consumers = net.consumers
        self.p_exit = dict(net.exit)
        p_t = net.transition_probabilities
        self.silent = {tid: net.transitions[tid].label is None for tid in net.transitions}
        self.task_label = {tid: net.transitions[tid].label for tid in net.transitions}

        # Cumulative thresholds per place for probabilistic routing. The
        # exit share occupies [0, p_o); consumer t occupies the next p_t.
        self.choice_table: dict[str, list[tuple[float, str | None]]] = {}
        for place in net.places:
            table: list[tuple[float, str | None]] = []
            acc = self.p_exit.get(place, 0.0)
            if acc > 0.0:
                table.append((acc, None))
            for tid in self.consumers[place]:
                acc += p_t[tid]
                table.append((acc, tid))
            self.choice_table[place] = table

        self.route = {c.name: c.route for c in model.classes}
        self.mix: list[tuple[float, str]] = []
        acc = 0.0
        for c in model.classes:
            acc += c.mix
            self.mix.append((acc, c.name))

        self.entry_places = sorted(net.entry)
        self.entry_cum: list[tuple[float, str]] = []
        acc = 0.0
        for place in self.entry_places:
            acc += net.entry[place]
            self.entry_cum.append((acc, place))

        base = str(seed)
        self.rng_arrivals = random.Random(f"{base}:arrivals")
        self._rng_route: dict[str, random.Random] = {}
        self._route_seed = base

        self.service: dict[str, tuple[str, float, random.Random | None]] = {}
        self.servers: dict[str, int] = {}
        for tid in net.transitions:
            label = self.task_label[tid]
            if label is None:
                continue
            spec = model.timing[label]
            dist = spec.distribution
            if isinstance(dist, Deterministic):
                self.service[tid] = ("det", dist.duration, None)
            else:
                self.service[tid] = ("exp", dist.rate, random.Random(f"{base}:service:{label}"))
            self.servers[tid] = spec.servers

        self.heap: list[tuple[float, int, int, int, int | str]] = []
        self.seq = 0
        self.queues: dict[str, list[tuple[float, int]]] = {tid: [] for tid in self.service}
        self.busy: dict[str, int] = {tid: 0 for tid in self.service}
        self.waiting: dict[str, dict[int, dict[str, int]]] = {tid: {} for tid in net.transitions}
        self.touched: set[str] = set()

        self.case_class: list[str | None] = []
        self.arrival_time: list[float] = []
        self.completion_time: list[float | None] = []
        self.token_count: list[int] = []

        arrivals = model.arrivals
        if isinstance(arrivals, Poisson):
            self._poisson_rate = arrivals.rate
            first = self.rng_arrivals.expovariate(arrivals.rate)
            if first <= self.horizon:
                self._push(first, _ARRIVAL, 0, "")
        else:
            self._burst = arrivals
            self._push_burst(0.0)

    # event plumbing -------------------------------------------------------

    def _push(self, time: float, kind: int, case: int, node: int | str) -> None:
        self.seq += 1
        heappush(self.heap, (time, kind, self.seq, case, node))

    def _rng_for_place(self, place: str) -> random.Random:
        rng = self._rng_route.get(place)
        if rng is None:
            rng = random.Random(f"{self._route_seed}:route:{place}")
            self._rng_route[place] = rng
        return rng

    def _emit(self, time: float, kind: str, case: int, node: str) -> None:
        if self.trace is not None:
            self.trace.append(TraceEvent(time, kind, case, node))

    def _push_burst(self, start: float) -> None:
        # Case ids are assigned when the arrival is processed; the event only
        # carries the position within the burst and the preset class, if any.
        if start > self.horizon:
            return
        burst = self._burst
        order = burst.class_order
        for i in range(burst.cases_per_burst):
            self._push(start, _ARRIVAL, i, "" if order is None else order[i % len(order)])

    # case lifecycle -------------------------------------------------------

    def _new_case(self, time: float, preset_class: str) -> int:
        case = len(self.arrival_time)
        if preset_class:
            cls: str | None = preset_class
        elif self.mix:
            u = self.rng_arrivals.random()
            cls = self.mix[-1][1]
            for threshold, name in self.mix:
                if u < threshold:
                    cls = name
                    break
        else:
            cls = None
        self.case_class.append(cls)
        self.arrival_time.append(time)
        self.completion_time.append(None)
        self.token_count.append(0)
        return case

    def _arrive(self, time: float, burst_pos: int, preset_class: str) -> None:
        case = self._new_case(time, preset_class)
        if len(self.entry_cum) == 1:
            place = self.entry_cum[0][1]
        else:
            u = self.rng_arrivals.random()
            place = self.entry_cum[-1][1]
            for threshold, candidate in self.entry_cum:
                if u < threshold:
                    place = candidate
                    break
        self._emit(time, "arrive", case, place)
        self.token_count[case] += 1
        self._flow(time, case, [place])
        if hasattr(self, "_poisson_rate"):
            nxt = time + self.rng_arrivals.expovariate(self._poisson_rate)
            if nxt <= self.horizon:
                self._push(nxt, _ARRIVAL, 0, "")
        elif burst_pos == self._burst.cases_per_burst - 1:
            self._push_burst(time + self._burst.spacing)

    def _flow(self, time: float, case: int, places: list[str]) -> None:
        """Move freshly produced tokens until each waits in a queue or leaves."""
        cls = self.case_class[case]
        route = self.route.get(cls, {}) if cls is not None else {}
        stack = list(places)
        while stack:
            place = stack.pop()
            p_leave = self.p_exit.get(place, 0.0)
            consumers = self.consumers[place]
            if p_leave <= 0.0 and not consumers:
                continue  # dead-end place: the token stays, the case never completes
            tid: str | None
            if p_leave >= 1.0:
                tid = None
            elif p_leave == 0.0 and place in route:
                tid = route[place]
            elif p_leave == 0.0 and len(consumers) == 1:
                tid = consumers[0]
            else:
                u = self._rng_for_place(place).random()
                if p_leave > 0.0 and u < p_leave:
                    tid = None
                elif place in route:
                    tid = route[place]
                else:
                    table = self.choice_table[place]
                    tid = table[-1][1]
                    for threshold, candidate in table:
                        if u < threshold:
                            tid = candidate
                            break
            if tid is None:
                self.token_count[case] -= 1
                self._emit(time, "depart", case, place)
                if self.token_count[case] == 0:
                    self.completion_time[case] = time
                    self._emit(time, "complete", case, place)
                continue
            counts = self.waiting[tid].setdefault(case, {})
            counts[place] = counts.get(place, 0) + 1
            preset = self.preset[tid]
            while all(counts.get(p, 0) >= 1 for p in preset):
                for p in preset:
                    counts[p] -= 1
                    if counts[p] == 0:
                        del counts[p]
                if self.silent[tid]:
                    self.token_count[case] += len(self.postset[tid]) - len(preset)
                    self._emit(time, "fire", case, tid)
                    stack.extend(self.postset[tid])
                else:
                    insort(self.queues[tid], (time, case))
                    self.touched.add(tid)
                    self._emit(time, "enqueue", case, tid)
            if not counts:
                del self.waiting[tid][case]

    def _complete(self, time: float, tid: str, case: int) -> None:
        self.busy[tid] -= 1
        self.touched.add(tid)
        preset = self.preset[tid]
        self.token_count[case] += len(self.postset[tid]) - len(preset)
        self._emit(time, "fire", case, tid)
        self._flow(time, case, list(self.postset[tid]))

    def _dispatch(self, tid: str, time: float) -> None:
        queue = self.queues[tid]
        limit = self.servers[tid]
        while queue and self.busy[tid] < limit:
            _, case = queue.pop(0)
            self.busy[tid] += 1
            kind, param, rng = self.service[tid]
            duration = param if kind == "det" else rng.expovariate(param)
            self._emit(time, "start", case, tid)
            self._push(time + duration, _COMPLETION, case, tid)

    # main loop ------------------------------------------------------------

    def run(self) -> None:
        heap = self.heap
        horizon = self.horizon
        touched = self.touched
        while heap and heap[0][0] <= horizon:
            now = heap[0][0]
            while heap and heap[0][0] == now:
                _, kind, _, case, node = heappop(heap)
                if kind == _ARRIVAL:
                    self._arrive(now, case, node)  # type: ignore[arg-type]
                else:
                    self._complete(now, node, case)  # type: ignore[arg-type]
            if touched:
                for tid in sorted(touched):
                    self._dispatch(tid, now)
                touched.clear()

    def records(self) -> list[CaseRecord]:
        return [
            CaseRecord(i, self.case_class[i], self.arrival_time[i], self.completion_time[i])
            for i in range(len(self.arrival_time))
        ]


def _checked(model: SimulationModel) -> None:
    report = validate_model(model)
    if not report.ok:
        raise InvalidModel(f"model is not simulatable:\n{report.summary()}", report)


def simulate(model: SimulationModel, seed: int) -> list[CaseRecord]:
    """Run the model once. Identical (model, seed) give identical records."""
    _checked(model)
    run = _Run(model, seed)
    run.run()
    return run.records()


def simulate_with_trace(model: SimulationModel, seed: int) -> tuple[list[CaseRecord], list[TraceEvent]]:
    """Like simulate, additionally returning the full event trace."""
    _checked(model)
    run = _Run(model, seed, collect_trace=True)
    run.run()
    assert run.trace is not None
    return run.records(), run.trace


def _t_quantile(confidence: float, df: int) -> float:
    return float(_scipy_stats.t.ppf(0.5 + confidence / 2.0, df))


def replicate(model: SimulationModel, reps: int, base_seed: int) -> ReplicationSummary:
    """Run ``reps`` independent replications with seeds base, base+1, ...

    The summary mean is the mean of per-replication means; the 95% interval
    uses the Student-t quantile with reps-1 degrees of freedom.
    """
    if reps < 1:
        raise ValueError(f"need at least one replication, got {reps}")
    _checked(model)
    rep_means: list[float] = []
    class_rep_means: dict[str, list[float]] = {}
    completed = 0
    in_flight = 0
    for i in range(reps):
        run = _Run(model, base_seed + i)
        run.run()
        sums: dict[str, float] = {}
        counts: dict[str, int] = {}
        total = 0.0
        n = 0
        for case in range(len(run.arrival_time)):
            done = run.completion_time[case]
            if done is None:
                in_flight += 1
                continue
            completed += 1
            t = done - run.arrival_time[case]
            total += t
            n += 1
            cls = run.case_class[case]
            if cls is not None:
                sums[cls] = sums.get(cls, 0.0) + t
                counts[cls] = counts.get(cls, 0) + 1
        rep_means.append(total / n if n else math.nan)
        for cls, s in sums.items():
            class_rep_means.setdefault(cls, []).append(s / counts[cls])
    valid = [m for m in rep_means if not math.isnan(m)]
    mean = fmean(valid) if valid else math.nan
    if len(valid) > 1:
        spread = stdev(valid)
        half = _t_quantile(0.95, len(valid) - 1) * spread / math.sqrt(len(valid)) if spread > 0 else 0.0
    else:
        half = 0.0
    class_means = {cls: fmean(vals) for cls, vals in sorted(class_rep_means.items())}
    return ReplicationSummary(
        replications=reps,
        rep_means=tuple(rep_means),
        mean=mean,
        ci_half_width=half,
        class_means=class_means,
        completed=completed,
        in_flight=in_flight,
    )


def estimate_utilization(model: SimulationModel, arrival_rate: float | None = None) -> dict[str, float] | None:
    """Offered load per task: arrival rate x expected visits x service demand.

    Expected visits are propagated exactly through acyclic nets, separately
    per case class so routing policies are respected. Returns None for nets
    with cycles, where a single forward pass cannot count visits.
    """
    net = model.net
    if arrival_rate is None:
        arrivals = model.arrivals
        if isinstance(arrivals, Poisson):
            arrival_rate = arrivals.rate
        else:
            arrival_rate = arrivals.cases_per_burst / arrivals.spacing

    nodes = list(net.places) + list(net.transitions)
    succ: dict[str, list[str]] = {n: [] for n in nodes}
    indegree: dict[str, int] = {n: 0 for n in nodes}
    for src, dst in net.arcs:
        succ[src].append(dst)
        indegree[dst] += 1
    order: list[str] = []
    frontier = deque(sorted(n for n in nodes if indegree[n] == 0))
    while frontier:
        node = frontier.popleft()
        order.append(node)
        for nxt in sorted(succ[node]):
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                frontier.append(nxt)
    if len(order) != len(nodes):
        return None  # cyclic

    p_t = net.transition_probabilities
    class_shares: list[tuple[float, dict[str, str]]] = (
        [(c.mix, c.route) for c in model.classes] if model.classes else [(1.0, {})]
    )
    visits: dict[str, float] = {tid: 0.0 for tid in net.transitions}
    for weight, route in class_shares:
        mass: dict[str, float] = {n: 0.0 for n in nodes}
        # Inflow into an AND-join is tracked per input place; the join fires
        # once per matched token set, so its count is the largest branch flow.
        join_inflow: dict[str, dict[str, float]] = {}
        for place, p in net.entry.items():
            mass[place] += p
        for node in order:
            if node in net.places:
                m = mass[node]
                if m == 0.0:
                    continue
                p_leave = net.exit.get(node, 0.0)
                routed = route.get(node)
                for tid in net.consumers[node]:
                    if routed is not None:
                        share = (1.0 - p_leave) if tid == routed else 0.0
                    else:
                        share = p_t[tid]
                    if share == 0.0:
                        continue
                    if len(net.preset[tid]) > 1:
                        join_inflow.setdefault(tid, {})[node] = m * share
                    else:
                        mass[tid] += m * share
            else:
                if len(net.preset[node]) > 1:
                    flows = join_inflow.get(node, {})
                    fired = max(flows.values()) if flows else 0.0
                else:
                    fired = mass[node]
                visits[node] += weight * fired
                for place in net.postset[node]:
                    mass[place] += fired

    loads: dict[str, float] = {}
    for tid in net.transitions:
        label = net.transitions[tid].label
        if label is None:
            continue
        spec = model.timing[label]
        loads[label] = arrival_rate * visits[tid] * spec.distribution.mean / spec.servers
    return loads


def sweep(original: SimulationModel, eliminated: SimulationModel,
          interarrivals: tuple[float, ...] | list[float],
          reps: int, base_seed: int) -> list[SweepRow]:
    """Replicate both variants over a grid of Poisson mean interarrival times.

    Both variants run under the same seeds at each grid point (common random
    numbers). Grid points where either variant has a task with offered load
    >= 1 are flagged "unstable"; the simulation still runs there, the means
    are then horizon-dependent.
    """
    rows: list[SweepRow] = []
    for index, gap in enumerate(interarrivals):
        arrivals = Poisson(1.0 / gap)
        pair_seed = base_seed + index * reps
        summary_orig = replicate(replace(original, arrivals=arrivals), reps, pair_seed)
        summary_elim = replicate(replace(eliminated, arrivals=arrivals), reps, pair_seed)
        flags: tuple[str, ...] = ()
        for variant in (original, eliminated):
            loads = estimate_utilization(replace(variant, arrivals=arrivals))
            if loads and max(loads.values()) >= 1.0 - 1e-9:
                flags = (UNSTABLE_FLAG,)
                break
        rows.append(SweepRow(
            interarrival=gap,
            mean_original=summary_orig.mean,
            ci_original=summary_orig.ci_half_width,
            mean_eliminated=summary_elim.mean,
            ci_eliminated=summary_elim.ci_half_width,
            flags=flags,
        ))
    return rows
