"""Timed simulation models: service specifications, arrivals, and builders."""

from __future__ import annotations

from dataclasses import dataclass

from .net import (
    CaseClass,
    PetriNet,
    Transition,
    ValidationReport,
    Violation,
    validate_net,
)

DEFAULT_HORIZON = 60_000.0  # minutes; 1000 hours
DEFAULT_TASK_DURATION = 5.0  # minutes


@dataclass(frozen=True)
class Deterministic:
    """A fixed service duration."""

    duration: float

    @property
    def mean(self) -> float:
        return self.duration


@dataclass(frozen=True)
class Exponential:
    """An exponential service time with the given rate (completions per minute)."""

    rate: float

    @property
    def mean(self) -> float:
        return 1.0 / self.rate


Distribution = Deterministic | Exponential


@dataclass(frozen=True)
class ServiceSpec:
    """Service behaviour of one labelled task.

    ``center_type`` optionally declares the queueing-station kind used by the
    analytic path (1 FiFo multi-server, 2 processor sharing, 3 infinite
    server, 4 preemptive-resume LCFS). The simulator itself only supports
    FiFo, the single discipline in this version.
    """

    distribution: Distribution
    servers: int = 1
    discipline: str = "fifo"
    center_type: int | None = None


@dataclass(frozen=True)
class Poisson:
    """Poisson arrivals with the given rate (cases per minute)."""

    rate: float


@dataclass(frozen=True)
class Burst:
    """Periodic bursts of simultaneous arrivals.

    Every ``spacing`` minutes, ``cases_per_burst`` cases arrive at the same
    instant, ordered by arrival sequence. ``class_order`` fixes their classes
    deterministically (cycled within the burst); None samples the class mix.
    """

    cases_per_burst: int
    spacing: float
    class_order: tuple[str, ...] | None = None


ArrivalProcess = Poisson | Burst


def default_burst_spacing(cases_per_burst: int, max_service: float) -> float:
    """A gap long enough that the model drains before the next burst."""
    return 10.0 * cases_per_burst * max_service


@dataclass(frozen=True)
class SimulationModel:
    """A net plus everything needed to run it: timing, arrivals, classes."""

    net: PetriNet
    timing: dict[str, ServiceSpec]
    arrivals: ArrivalProcess
    classes: tuple[CaseClass, ...] = ()
    horizon: float = DEFAULT_HORIZON


def validate_model(model: SimulationModel) -> ValidationReport:
    """validate_net plus the model-level invariants (timing, classes, arrivals)."""
    out = list(validate_net(model.net).violations)
    net = model.net

    labels = set(net.label_index)
    for label in sorted(labels - set(model.timing)):
        out.append(Violation("timing-missing", f"labelled task {label} has no service specification", (label,)))
    for label in sorted(set(model.timing) - labels):
        out.append(Violation("timing-unknown", f"service specification for unknown task {label}", (label,)))
    for label, spec in sorted(model.timing.items()):
        if spec.servers < 1:
            out.append(Violation("servers", f"task {label} has {spec.servers} servers", (label,)))
        if spec.discipline != "fifo":
            out.append(Violation("discipline", f"task {label} uses unsupported discipline {spec.discipline!r}", (label,)))
        if isinstance(spec.distribution, Deterministic) and spec.distribution.duration < 0:
            out.append(Violation("duration", f"task {label} has negative duration", (label,)))
        if isinstance(spec.distribution, Exponential) and spec.distribution.rate <= 0:
            out.append(Violation("rate", f"task {label} has non-positive service rate", (label,)))
        if spec.center_type is not None and spec.center_type not in (1, 2, 3, 4):
            out.append(Violation("center-type", f"task {label} declares unknown center type {spec.center_type}", (label,)))

    if model.classes:
        total = sum(c.mix for c in model.classes)
        if abs(total - 1.0) > 1e-9:
            out.append(Violation("class-mix", f"class mix probabilities sum to {total:.6g}",
                                 tuple(c.name for c in model.classes)))
        names = [c.name for c in model.classes]
        if len(set(names)) != len(names):
            out.append(Violation("class-names", "case class names are not unique", tuple(names)))
        for c in model.classes:
            for place, tid in sorted(c.route.items()):
                if place not in net.places:
                    out.append(Violation("route", f"class {c.name} routes at unknown place {place}", (c.name, place)))
                elif tid not in net.transitions:
                    out.append(Violation("route", f"class {c.name} routes to unknown transition {tid}", (c.name, tid)))
                elif tid not in net.consumers[place]:
                    out.append(Violation("route", f"class {c.name} routes {place} to {tid}, which does not consume from it",
                                         (c.name, place, tid)))

    arrivals = model.arrivals
    if isinstance(arrivals, Poisson):
        if arrivals.rate <= 0:
            out.append(Violation("arrivals", f"Poisson rate is {arrivals.rate:.6g}", ()))
    else:
        if arrivals.cases_per_burst < 1:
            out.append(Violation("arrivals", f"burst size is {arrivals.cases_per_burst}", ()))
        if arrivals.spacing <= 0:
            out.append(Violation("arrivals", f"burst spacing is {arrivals.spacing:.6g}", ()))
        if arrivals.class_order:
            known = {c.name for c in model.classes}
            for name in arrivals.class_order:
                if name not in known:
                    out.append(Violation("arrivals", f"burst class order names unknown class {name}", (name,)))

    if model.horizon <= 0:
        out.append(Violation("horizon", f"horizon is {model.horizon:.6g}", ()))

    return ValidationReport(tuple(out))


def build_counterexample(eliminated: bool = False, *,
                         arrivals: ArrivalProcess | None = None,
                         horizon: float = DEFAULT_HORIZON) -> SimulationModel:
    """The two-branch model on which eliminating a task slows the process down.

    An AND-split starts an upper and a lower branch per case. On the upper
    branch, red cases run task R and blue cases run task B, then every case
    runs A. The lower branch is the sequence P then P'. An AND-join merges
    the branches before the single exit place. All tasks take a deterministic
    5 minutes on a single dedicated FiFo resource.

    With ``eliminated`` the R transition is silent and takes no time, which
    lets red cases overtake blue ones in front of A.
    """
    d = DEFAULT_TASK_DURATION
    places = frozenset({
        "p_start", "p_choice", "p_service", "p_upper_done",
        "p_lower_in", "p_lower_mid", "p_lower_done", "p_end",
    })
    transitions = {
        "t_split": Transition("t_split", None),
        "t_R": Transition("t_R", None if eliminated else "R"),
        "t_B": Transition("t_B", "B"),
        "t_A": Transition("t_A", "A"),
        "t_P": Transition("t_P", "P"),
        "t_Pp": Transition("t_Pp", "P'"),
        "t_join": Transition("t_join", None),
    }
    arcs = frozenset({
        ("p_start", "t_split"),
        ("t_split", "p_choice"), ("t_split", "p_lower_in"),
        ("p_choice", "t_R"), ("p_choice", "t_B"),
        ("t_R", "p_service"), ("t_B", "p_service"),
        ("p_service", "t_A"), ("t_A", "p_upper_done"),
        ("p_lower_in", "t_P"), ("t_P", "p_lower_mid"),
        ("p_lower_mid", "t_Pp"), ("t_Pp", "p_lower_done"),
        ("p_upper_done", "t_join"), ("p_lower_done", "t_join"),
        ("t_join", "p_end"),
    })
    probabilities = {
        "t_split": 1.0,
        "t_R": 0.5,
        "t_B": 0.5,
        "t_A": 1.0,
        "t_P": 1.0,
        "t_Pp": 1.0,
        "t_join": 1.0,
    }
    net = PetriNet(
        places=places,
        transitions=transitions,
        arcs=arcs,
        entry={"p_start": 1.0},
        exit={"p_end": 1.0},
        transition_probabilities=probabilities,
    )
    timing = {
        label: ServiceSpec(Deterministic(d), servers=1)
        for label in ("R", "B", "A", "P", "P'")
    }
    if eliminated:
        del timing["R"]
    classes = (
        CaseClass("red", 0.5, {"p_choice": "t_R"}),
        CaseClass("blue", 0.5, {"p_choice": "t_B"}),
    )
    if arrivals is None:
        arrivals = Poisson(1.0 / 6.0)
    return SimulationModel(net=net, timing=timing, arrivals=arrivals,
                           classes=classes, horizon=horizon)


def build_tandem(rates: tuple[float, ...] = (2.0, 4.0), *,
                 arrival_rate: float = 1.0,
                 horizon: float = DEFAULT_HORIZON) -> SimulationModel:
    """A line of exponential single-server tasks S1, S2, ... visited by every case."""
    places: set[str] = {"q0"}
    transitions: dict[str, Transition] = {}
    arcs: set[tuple[str, str]] = set()
    probabilities: dict[str, float] = {}
    timing: dict[str, ServiceSpec] = {}
    for i, rate in enumerate(rates, start=1):
        tid = f"t_S{i}"
        label = f"S{i}"
        places.add(f"q{i}")
        transitions[tid] = Transition(tid, label)
        arcs.add((f"q{i - 1}", tid))
        arcs.add((tid, f"q{i}"))
        probabilities[tid] = 1.0
        timing[label] = ServiceSpec(Exponential(rate), servers=1, center_type=1)
    last = f"q{len(rates)}"
    net = PetriNet(
        places=frozenset(places),
        transitions=transitions,
        arcs=frozenset(arcs),
        entry={"q0": 1.0},
        exit={last: 1.0},
        transition_probabilities=probabilities,
    )
    return SimulationModel(net=net, timing=timing, arrivals=Poisson(arrival_rate),
                           classes=(), horizon=horizon)


def build_loopback(loop_probability: float = 0.3, *,
                   arrival_rate: float = 1.0,
                   horizon: float = DEFAULT_HORIZON) -> SimulationModel:
    """Two entry branches feeding a task C whose output loops back silently.

    The exit place releases a token with probability ``1 - loop_probability``
    and sends it back in front of C otherwise, so C is visited a geometric
    number of times.
    """
    r = loop_probability
    places = frozenset({"i1", "i2", "pC", "pD"})
    transitions = {
        "t_A": Transition("t_A", "A"),
        "t_B": Transition("t_B", "B"),
        "t_C": Transition("t_C", "C"),
        "t_back": Transition("t_back", None),
    }
    arcs = frozenset({
        ("i1", "t_A"), ("t_A", "pC"),
        ("i2", "t_B"), ("t_B", "pC"),
        ("pC", "t_C"), ("t_C", "pD"),
        ("pD", "t_back"), ("t_back", "pC"),
    })
    net = PetriNet(
        places=places,
        transitions=transitions,
        arcs=arcs,
        entry={"i1": 0.6, "i2": 0.4},
        exit={"pD": 1.0 - r},
        transition_probabilities={"t_A": 1.0, "t_B": 1.0, "t_C": 1.0, "t_back": r},
    )
    timing = {
        "A": ServiceSpec(Exponential(4.0), servers=1, center_type=1),
        "B": ServiceSpec(Exponential(4.0), servers=1, center_type=1),
        "C": ServiceSpec(Exponential(6.0), servers=1, center_type=1),
    }
    return SimulationModel(net=net, timing=timing, arrivals=Poisson(arrival_rate),
                           classes=(), horizon=horizon)
