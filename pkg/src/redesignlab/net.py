"""Petri-net process models and their token-game semantics.

A net is a bipartite graph of places and transitions. Labelled transitions
stand for tasks that take time; silent transitions (label ``None``) are
structural glue such as AND-splits and AND-joins and fire instantaneously.
Probabilities are attached to transitions (firing probability given a token
in the preset), to entry places (where a new case starts), and to exit
places (probability that a token leaves the process there).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

from .errors import AmbiguousLabel, NotEnabled, UnknownLabel, UnknownTransition

PROB_TOL = 1e-9

CaseId = int | str


@dataclass(frozen=True)
class Transition:
    """A transition; ``label`` is None for silent transitions."""

    id: str
    label: str | None = None


@dataclass(frozen=True)
class CaseClass:
    """A case class with its arrival mix share and routing policy.

    ``route`` maps a choice place to the transition this class takes there.
    Places absent from the map fall back to sampling by firing probability.
    An empty map means fully probabilistic routing.
    """

    name: str
    mix: float
    route: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Token:
    """A token carries its case id, the case class, and the time it was produced."""

    case: CaseId
    case_class: str | None = None
    entered: float = 0.0


@dataclass(frozen=True)
class Marking:
    """Tokens per place, in production order. Insertion order is the FiFo order."""

    tokens: dict[str, tuple[Token, ...]] = field(default_factory=dict)

    def at(self, place: str) -> tuple[Token, ...]:
        return self.tokens.get(place, ())

    def count(self, place: str) -> int:
        return len(self.tokens.get(place, ()))

    def total(self) -> int:
        return sum(len(ts) for ts in self.tokens.values())

    def cases(self) -> set[CaseId]:
        return {tok.case for ts in self.tokens.values() for tok in ts}


@dataclass(frozen=True)
class PetriNet:
    """Structure and probability annotations of a process model.

    Ids are opaque strings; labels are separate from ids so removing a label
    (task elimination) preserves the identity of the transition.
    """

    places: frozenset[str]
    transitions: dict[str, Transition]
    arcs: frozenset[tuple[str, str]]
    entry: dict[str, float]
    exit: dict[str, float]
    transition_probabilities: dict[str, float]

    @cached_property
    def preset(self) -> dict[str, tuple[str, ...]]:
        pre: dict[str, list[str]] = {t: [] for t in self.transitions}
        for src, dst in self.arcs:
            if src in self.places and dst in self.transitions:
                pre[dst].append(src)
        return {t: tuple(sorted(ps)) for t, ps in pre.items()}

    @cached_property
    def postset(self) -> dict[str, tuple[str, ...]]:
        post: dict[str, list[str]] = {t: [] for t in self.transitions}
        for src, dst in self.arcs:
            if src in self.transitions and dst in self.places:
                post[src].append(dst)
        return {t: tuple(sorted(ps)) for t, ps in post.items()}

    @cached_property
    def consumers(self) -> dict[str, tuple[str, ...]]:
        """Transitions consuming from each place, sorted for determinism."""
        cons: dict[str, list[str]] = {p: [] for p in self.places}
        for src, dst in self.arcs:
            if src in self.places and dst in self.transitions:
                cons[src].append(dst)
        return {p: tuple(sorted(ts)) for p, ts in cons.items()}

    @cached_property
    def producers(self) -> dict[str, tuple[str, ...]]:
        prod: dict[str, list[str]] = {p: [] for p in self.places}
        for src, dst in self.arcs:
            if src in self.transitions and dst in self.places:
                prod[dst].append(src)
        return {p: tuple(sorted(ts)) for p, ts in prod.items()}

    @cached_property
    def label_index(self) -> dict[str, tuple[str, ...]]:
        idx: dict[str, list[str]] = {}
        for t in sorted(self.transitions):
            label = self.transitions[t].label
            if label is not None:
                idx.setdefault(label, []).append(t)
        return {label: tuple(ts) for label, ts in idx.items()}

    @cached_property
    def labelled(self) -> tuple[str, ...]:
        return tuple(t for t in sorted(self.transitions) if self.transitions[t].label is not None)


@dataclass(frozen=True)
class Violation:
    """One violated invariant; ``elements`` names the offending ids."""

    rule: str
    message: str
    elements: tuple[str, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __iter__(self):
        return iter(self.violations)

    def summary(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(f"[{v.rule}] {v.message}" for v in self.violations)


def resolve_label(net: PetriNet, label: str) -> str:
    """Return the id of the unique transition carrying ``label``."""
    ids = net.label_index.get(label, ())
    if not ids:
        raise UnknownLabel(f"no transition labelled {label!r}")
    if len(ids) > 1:
        raise AmbiguousLabel(f"label {label!r} is carried by {', '.join(ids)}")
    return ids[0]


def validate_net(net: PetriNet) -> ValidationReport:
    """Check structural and probability invariants.

    Violations are data, not exceptions: callers decide whether to reject.
    """
    out: list[Violation] = []
    nodes_ok = True

    for src, dst in sorted(net.arcs):
        src_place = src in net.places
        dst_place = dst in net.places
        src_trans = src in net.transitions
        dst_trans = dst in net.transitions
        if not (src_place or src_trans) or not (dst_place or dst_trans):
            out.append(Violation("arc-endpoints", f"arc {src} -> {dst} references an unknown id", (src, dst)))
            nodes_ok = False
        elif not ((src_place and dst_trans) or (src_trans and dst_place)):
            out.append(Violation("bipartite", f"arc {src} -> {dst} does not connect a place and a transition", (src, dst)))
            nodes_ok = False

    for place in sorted(net.entry):
        if place not in net.places:
            out.append(Violation("entry-places", f"entry place {place} is not a place", (place,)))
    for place in sorted(net.exit):
        if place not in net.places:
            out.append(Violation("exit-places", f"exit place {place} is not a place", (place,)))

    for place, p in sorted(net.entry.items()):
        if not 0.0 <= p <= 1.0:
            out.append(Violation("probability-range", f"entry probability of {place} is {p:.6g}", (place,)))
    for place, p in sorted(net.exit.items()):
        if not 0.0 <= p <= 1.0:
            out.append(Violation("probability-range", f"exit probability of {place} is {p:.6g}", (place,)))
    for tid in sorted(net.transitions):
        if tid not in net.transition_probabilities:
            out.append(Violation("firing-probability", f"transition {tid} has no firing probability", (tid,)))
        else:
            p = net.transition_probabilities[tid]
            if not 0.0 <= p <= 1.0:
                out.append(Violation("probability-range", f"firing probability of {tid} is {p:.6g}", (tid,)))

    if net.entry:
        total = sum(net.entry.values())
        if abs(total - 1.0) > PROB_TOL:
            out.append(Violation("entry-sum", f"entry probabilities sum to {total:.6g}", tuple(sorted(net.entry))))
    else:
        out.append(Violation("entry-sum", "net has no entry place", ()))
    if not net.exit:
        out.append(Violation("exit-places", "net has no exit place", ()))

    if not nodes_ok:
        return ValidationReport(tuple(out))

    # Transitions sharing a preset are one probabilistic choice and must sum
    # to 1. Exit places carry their own rule (p_o absorbs part of the mass),
    # so single-place preset groups at exit places are excluded here.
    groups: dict[tuple[str, ...], list[str]] = {}
    for tid in sorted(net.transitions):
        pre = net.preset[tid]
        if not pre:
            out.append(Violation("empty-preset", f"transition {tid} has no input place", (tid,)))
            continue
        groups.setdefault(pre, []).append(tid)
    for pre, tids in sorted(groups.items()):
        if len(pre) == 1 and pre[0] in net.exit:
            continue
        total = sum(net.transition_probabilities.get(t, 0.0) for t in tids)
        if abs(total - 1.0) > PROB_TOL:
            out.append(Violation(
                "choice-sum",
                f"firing probabilities at preset {{{', '.join(pre)}}} sum to {total:.6g}",
                tuple(tids),
            ))

    for place in sorted(net.exit):
        if place not in net.places:
            continue
        total = net.exit[place] + sum(
            net.transition_probabilities.get(t, 0.0) for t in net.consumers[place]
        )
        if abs(total - 1.0) > PROB_TOL:
            out.append(Violation(
                "exit-sum",
                f"exit probability plus consuming probabilities at {place} sum to {total:.6g}",
                (place,),
            ))

    # Every case started at an entry place must be able to leave the net.
    for place in sorted(net.entry):
        if place not in net.places:
            continue
        seen = {place}
        frontier = deque([place])
        reached_exit = place in net.exit
        while frontier and not reached_exit:
            node = frontier.popleft()
            succ = net.consumers[node] if node in net.places else net.postset[node]
            for nxt in succ:
                if nxt in seen:
                    continue
                seen.add(nxt)
                if nxt in net.exit:
                    reached_exit = True
                    break
                frontier.append(nxt)
        if not reached_exit:
            out.append(Violation("unreachable-exit", f"no exit place reachable from entry place {place}", (place,)))

    return ValidationReport(tuple(out))


def is_state_machine(net: PetriNet) -> bool:
    """True when every transition has exactly one input and one output place."""
    return all(
        len(net.preset[t]) == 1 and len(net.postset[t]) == 1
        for t in net.transitions
    )


def enabled_transitions(net: PetriNet, marking: Marking) -> set[str]:
    """Transitions whose every preset place holds at least one token."""
    return {
        tid
        for tid in net.transitions
        if all(marking.count(p) > 0 for p in net.preset[tid])
    }


def fire(net: PetriNet, marking: Marking, transition: str, case: CaseId, time: float = 0.0) -> Marking:
    """Fire ``transition`` for one case and return the successor marking.

    Consumes the oldest token of the case from every preset place and
    produces one token of the case into every postset place. AND-joins
    therefore only combine tokens belonging to the same case.
    """
    if transition not in net.transitions:
        raise UnknownTransition(f"no transition with id {transition!r}")
    consumed_at: list[tuple[str, int]] = []
    case_class: str | None = None
    for place in net.preset[transition]:
        tokens = marking.at(place)
        index = next((i for i, tok in enumerate(tokens) if tok.case == case), None)
        if index is None:
            raise NotEnabled(f"{transition} has no token of case {case!r} in {place}")
        consumed_at.append((place, index))
        if case_class is None:
            case_class = tokens[index].case_class
    tokens_by_place = dict(marking.tokens)
    for place, index in consumed_at:
        tokens = tokens_by_place[place]
        tokens_by_place[place] = tokens[:index] + tokens[index + 1:]
        if not tokens_by_place[place]:
            del tokens_by_place[place]
    produced = Token(case, case_class, time)
    for place in net.postset[transition]:
        tokens_by_place[place] = tokens_by_place.get(place, ()) + (produced,)
    return Marking(tokens_by_place)
