"""Random instance generators for property tests.

Random state machines: a forward backbone chain guarantees every token can
reach the exit; extra transitions add choices, skips, and cycles. Service
rates are calibrated after solving the traffic equations with placeholder
rates, so every generated network is stable by construction.

Random schedules: list scheduling over the two-class example model, with
random case interleavings, durations, and idle delays. Resource free times
only ever grow, so the result is feasible by construction.
"""

from __future__ import annotations

import random

from redesignlab import (
    CenterSpec,
    PetriNet,
    Schedule,
    ScheduleEntry,
    SimulationModel,
    Transition,
    build_counterexample,
    to_bcmp,
    traffic_equations,
)


def random_state_machine(rng: random.Random) -> tuple[PetriNet, dict[str, CenterSpec]]:
    """A stable open state machine with 2..8 labelled centers and Lambda=1."""
    backbone = rng.randint(2, 6)
    extras = rng.randint(0, 8 - backbone)
    n_places = backbone + 1

    transitions: dict[str, Transition] = {}
    arcs: set[tuple[str, str]] = set()
    consumers: dict[int, list[str]] = {i: [] for i in range(n_places)}

    for i in range(backbone):
        tid = f"t{i + 1}"
        transitions[tid] = Transition(tid, f"S{i + 1}")
        arcs.add((f"p{i}", tid))
        arcs.add((tid, f"p{i + 1}"))
        consumers[i].append(tid)
    for k in range(extras):
        src = rng.randrange(n_places)
        dst = rng.randrange(n_places)
        if src == n_places - 1 and rng.random() < 0.6:
            src = rng.randrange(n_places - 1)  # loops at the exit stay uncommon
        tid = f"x{k + 1}"
        transitions[tid] = Transition(tid, f"X{k + 1}")
        arcs.add((f"p{src}", tid))
        arcs.add((tid, f"p{dst}"))
        consumers[src].append(tid)

    probabilities: dict[str, float] = {}
    exit_: dict[str, float] = {}
    last = n_places - 1
    for i in range(n_places):
        tids = consumers[i]
        if i == last:
            if tids:
                p_o = rng.uniform(0.5, 0.9)
                weights = [rng.random() + 0.1 for _ in tids]
                scale = (1.0 - p_o) / sum(weights)
                for tid, w in zip(tids, weights):
                    probabilities[tid] = w * scale
            else:
                p_o = 1.0
            exit_[f"p{i}"] = p_o
        else:
            weights = [rng.random() + 0.1 for _ in tids]
            weights[0] += 0.5  # keep decent mass on the forward backbone
            scale = 1.0 / sum(weights)
            for tid, w in zip(tids, weights):
                probabilities[tid] = w * scale

    entry = {"p0": 1.0}
    if n_places > 2 and rng.random() < 0.3:
        share = rng.uniform(0.1, 0.5)
        entry = {"p0": 1.0 - share, "p1": share}

    net = PetriNet(
        places=frozenset(f"p{i}" for i in range(n_places)),
        transitions=transitions,
        arcs=frozenset(arcs),
        entry=entry,
        exit=exit_,
        transition_probabilities=probabilities,
    )

    placeholder = {t.label: CenterSpec(1, 1.0, 1) for t in transitions.values()}
    lam = traffic_equations(to_bcmp(net, placeholder, 1.0))

    timing: dict[str, CenterSpec] = {}
    for tid, t in transitions.items():
        kind = rng.choice((1, 1, 2, 3, 4))
        servers = rng.randint(1, 3) if kind == 1 else 1
        if kind == 3:
            rate = rng.uniform(0.5, 3.0)
        else:
            target = rng.uniform(0.2, 0.85)
            rate = lam[tid] / (servers * target)
        timing[t.label] = CenterSpec(kind, rate, servers)
    return net, timing


_TASKS = {"red": ("R", "A", "P", "P'"), "blue": ("B", "A", "P", "P'")}
_UPPER = {"red": "R", "blue": "B"}


def random_schedule(rng: random.Random) -> tuple[SimulationModel, Schedule]:
    """A feasible schedule for the two-class example model."""
    model = build_counterexample(eliminated=False)
    n_cases = rng.randint(3, 12)
    arrivals: dict[str, float] = {}
    classes: dict[str, str] = {}
    clock = 0.0
    for i in range(n_cases):
        clock += rng.uniform(0.0, 12.0)
        case = f"c{i}"
        arrivals[case] = clock
        classes[case] = rng.choice(("red", "blue"))

    free = {f"r_{task}": 0.0 for tasks in _TASKS.values() for task in tasks}
    entries: list[ScheduleEntry] = []

    def delay() -> float:
        return 0.0 if rng.random() < 0.5 else rng.uniform(0.0, 3.0)

    def place(case: str, task: str, earliest: float) -> float:
        resource = f"r_{task}"
        start = max(earliest, free[resource]) + delay()
        end = start + rng.uniform(2.0, 8.0)
        free[resource] = end
        entries.append(ScheduleEntry(case, task, resource, start, end))
        return end

    order = list(arrivals)
    rng.shuffle(order)
    for case in order:
        arrived = arrivals[case]
        upper_done = place(case, _UPPER[classes[case]], arrived)
        place(case, "A", upper_done)
        lower_done = place(case, "P", arrived)
        place(case, "P'", lower_done)

    return model, Schedule(entries=tuple(entries), arrivals=dict(arrivals))
