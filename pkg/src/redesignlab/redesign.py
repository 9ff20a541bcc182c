"""Redesign transformations: eliminate, automate, and parallelise a task.

Each transformation returns a new model; the input is never modified.
Transition ids survive every transformation, so routing policies and
comparisons across variants keep working.
"""

from __future__ import annotations

from dataclasses import replace

from .errors import NegativeDuration, UnsupportedDistribution
from .model import Deterministic, ServiceSpec, SimulationModel
from .net import PetriNet, Transition, resolve_label


def silence_label(net: PetriNet, label: str) -> PetriNet:
    """Remove ``label`` from its (unique) transition, keeping the structure.

    The transition still fires with its original probability; it just no
    longer takes time or counts as a task.
    """
    tid = resolve_label(net, label)
    transitions = dict(net.transitions)
    transitions[tid] = Transition(tid, None)
    return replace(net, transitions=transitions)


def eliminate_task(model: SimulationModel, label: str) -> SimulationModel:
    """Drop the task: its transition turns silent and loses its service spec.

    Structure, probabilities, routing policies, and every other task are
    untouched, so the variant differs from the original only in where time
    is spent.
    """
    net = silence_label(model.net, label)
    timing = {k: v for k, v in model.timing.items() if k != label}
    return replace(model, net=net, timing=timing)


def automate_task(model: SimulationModel, label: str, epsilon: float) -> SimulationModel:
    """Shrink the task's service time to a deterministic ``epsilon`` >= 0.

    The task keeps its queue, server count, and place in the net; only the
    time it consumes changes.
    """
    resolve_label(model.net, label)
    if epsilon < 0:
        raise NegativeDuration(f"automated duration must be >= 0, got {epsilon:.6g}")
    old = model.timing[label]
    timing = dict(model.timing)
    timing[label] = replace(old, distribution=Deterministic(epsilon))
    return replace(model, timing=timing)


def parallelize_task(model: SimulationModel, label: str, n: int) -> SimulationModel:
    """Split a deterministic task into ``n`` parallel parts of equal duration.

    The original transition becomes a silent AND-split feeding n new tasks
    ``label_1`` .. ``label_n`` of duration d/n each, merged by a silent
    AND-join that produces into the original output places. The total
    service content d is conserved. Only deterministic tasks can be split
    this way; anything else raises UnsupportedDistribution.
    """
    if n < 1:
        raise ValueError(f"number of parallel parts must be >= 1, got {n}")
    tid = resolve_label(model.net, label)
    spec = model.timing[label]
    if not isinstance(spec.distribution, Deterministic):
        raise UnsupportedDistribution(f"task {label} does not have a deterministic duration")
    duration = spec.distribution.duration

    net = model.net
    existing = set(net.places) | set(net.transitions)

    def fresh(candidate: str) -> str:
        while candidate in existing:
            candidate += "_"
        existing.add(candidate)
        return candidate

    branch_in = [fresh(f"{tid}:b{k}") for k in range(1, n + 1)]
    branch_out = [fresh(f"{tid}:c{k}") for k in range(1, n + 1)]
    part_ids = [fresh(f"{tid}:{k}") for k in range(1, n + 1)]
    join_id = fresh(f"{tid}:join")

    transitions = dict(net.transitions)
    transitions[tid] = Transition(tid, None)  # the original id becomes the split
    probabilities = dict(net.transition_probabilities)
    arcs = {a for a in net.arcs if a[0] != tid}  # keep inputs, rewire outputs
    places = set(net.places)
    for k in range(n):
        transitions[part_ids[k]] = Transition(part_ids[k], f"{label}_{k + 1}")
        probabilities[part_ids[k]] = 1.0
        places.add(branch_in[k])
        places.add(branch_out[k])
        arcs.add((tid, branch_in[k]))
        arcs.add((branch_in[k], part_ids[k]))
        arcs.add((part_ids[k], branch_out[k]))
        arcs.add((branch_out[k], join_id))
    transitions[join_id] = Transition(join_id, None)
    probabilities[join_id] = 1.0
    for out_place in net.postset[tid]:
        arcs.add((join_id, out_place))

    new_net = PetriNet(
        places=frozenset(places),
        transitions=transitions,
        arcs=frozenset(arcs),
        entry=dict(net.entry),
        exit=dict(net.exit),
        transition_probabilities=probabilities,
    )
    timing = {k: v for k, v in model.timing.items() if k != label}
    for k in range(n):
        timing[f"{label}_{k + 1}"] = ServiceSpec(
            Deterministic(duration / n),
            servers=1,
            discipline=spec.discipline,
            center_type=spec.center_type,
        )
    return replace(model, net=new_net, timing=timing)
