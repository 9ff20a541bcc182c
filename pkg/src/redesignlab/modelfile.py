"""Line-oriented model files, bundled example models, and schedule CSVs.

The model format is sectioned plain text made for diffing and hand edits:

    [places]        one place id per line
    [transitions]   id  label  firing-probability   ('-' label = silent)
    [arcs]          source -> target
    [entry]         place  probability
    [exit]          place  probability
    [classes]       name  mix  route               ('-' = probabilistic,
                    otherwise place=transition[,place=transition...])
    [timing]        label  det|exp  value  servers  [type 1|2|3|4]
                    (value is the duration for det, the rate for exp)
    [arrivals]      poisson rate | burst size spacing order
                    (order is '-' or a comma-separated class list)
    [horizon]       minutes

'#' starts a comment, blank lines are ignored, numbers round-trip exactly.
"""

from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path

from .errors import MissingTiming, ParseError, ValidationFailed
from .model import (
    Burst,
    Deterministic,
    Exponential,
    Poisson,
    ServiceSpec,
    SimulationModel,
    validate_model,
)
from .net import CaseClass, PetriNet, Transition
from .schedule import Schedule, ScheduleEntry

_SECTIONS = ("places", "transitions", "arcs", "entry", "exit",
             "classes", "timing", "arrivals", "horizon")
_REQUIRED = ("places", "transitions", "arcs", "entry", "exit", "timing", "arrivals")

BUILTIN_PREFIX = "builtin:"


def _number(lineno: int, token: str, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(lineno, f"{what} must be a number, got {token!r}") from None


def parse_model_text(text: str) -> SimulationModel:
    """Parse the sectioned format. Raises ParseError with the offending line,
    MissingTiming when a labelled task has no timing line, and
    ValidationFailed when the assembled model violates net invariants."""
    sections: dict[str, list[tuple[int, list[str]]]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _SECTIONS:
                raise ParseError(lineno, f"unknown section [{name}]")
            if name in sections:
                raise ParseError(lineno, f"duplicate section [{name}]")
            sections[name] = []
            current = name
            continue
        if current is None:
            raise ParseError(lineno, "content before the first section header")
        sections[current].append((lineno, line.split()))
    for name in _REQUIRED:
        if name not in sections:
            raise ParseError(0, f"missing section [{name}]")

    places: set[str] = set()
    for lineno, tokens in sections["places"]:
        if len(tokens) != 1:
            raise ParseError(lineno, "a place line holds exactly one id")
        if tokens[0] in places:
            raise ParseError(lineno, f"duplicate place {tokens[0]}")
        places.add(tokens[0])

    transitions: dict[str, Transition] = {}
    probabilities: dict[str, float] = {}
    for lineno, tokens in sections["transitions"]:
        if len(tokens) != 3:
            raise ParseError(lineno, "a transition line is: id label probability")
        tid, label, prob = tokens
        if tid in transitions:
            raise ParseError(lineno, f"duplicate transition {tid}")
        transitions[tid] = Transition(tid, None if label == "-" else label)
        probabilities[tid] = _number(lineno, prob, "firing probability")

    arcs: set[tuple[str, str]] = set()
    for lineno, tokens in sections["arcs"]:
        if len(tokens) != 3 or tokens[1] != "->":
            raise ParseError(lineno, "an arc line is: source -> target")
        arcs.add((tokens[0], tokens[2]))

    entry: dict[str, float] = {}
    for lineno, tokens in sections["entry"]:
        if len(tokens) != 2:
            raise ParseError(lineno, "an entry line is: place probability")
        if tokens[0] in entry:
            raise ParseError(lineno, f"duplicate entry place {tokens[0]}")
        entry[tokens[0]] = _number(lineno, tokens[1], "entry probability")

    exit_: dict[str, float] = {}
    for lineno, tokens in sections["exit"]:
        if len(tokens) != 2:
            raise ParseError(lineno, "an exit line is: place probability")
        if tokens[0] in exit_:
            raise ParseError(lineno, f"duplicate exit place {tokens[0]}")
        exit_[tokens[0]] = _number(lineno, tokens[1], "exit probability")

    classes: list[CaseClass] = []
    for lineno, tokens in sections.get("classes", []):
        if len(tokens) != 3:
            raise ParseError(lineno, "a class line is: name mix route")
        name, mix, route_spec = tokens
        route: dict[str, str] = {}
        if route_spec not in ("-", "probabilistic"):
            for part in route_spec.split(","):
                if "=" not in part:
                    raise ParseError(lineno, f"route entry {part!r} is not place=transition")
                place, tid = part.split("=", 1)
                route[place] = tid
        classes.append(CaseClass(name, _number(lineno, mix, "class mix"), route))

    timing: dict[str, ServiceSpec] = {}
    for lineno, tokens in sections["timing"]:
        if len(tokens) not in (4, 6):
            raise ParseError(lineno, "a timing line is: label det|exp value servers [type n]")
        label, kind, value, servers = tokens[:4]
        if label in timing:
            raise ParseError(lineno, f"duplicate timing for {label}")
        if kind == "det":
            dist = Deterministic(_number(lineno, value, "duration"))
        elif kind == "exp":
            dist = Exponential(_number(lineno, value, "service rate"))
        else:
            raise ParseError(lineno, f"unknown distribution {kind!r} (use det or exp)")
        try:
            server_count = int(servers)
        except ValueError:
            raise ParseError(lineno, f"server count must be an integer, got {servers!r}") from None
        center_type: int | None = None
        if len(tokens) == 6:
            if tokens[4] != "type":
                raise ParseError(lineno, f"expected 'type', got {tokens[4]!r}")
            try:
                center_type = int(tokens[5])
            except ValueError:
                raise ParseError(lineno, f"center type must be an integer, got {tokens[5]!r}") from None
        timing[label] = ServiceSpec(dist, servers=server_count, center_type=center_type)

    if len(sections["arrivals"]) != 1:
        where = sections["arrivals"][1][0] if sections["arrivals"] else 0
        raise ParseError(where, "the arrivals section holds a single line")
    lineno, tokens = sections["arrivals"][0]
    arrivals: Poisson | Burst
    if tokens[0] == "poisson":
        if len(tokens) != 2:
            raise ParseError(lineno, "poisson arrivals are: poisson rate")
        arrivals = Poisson(_number(lineno, tokens[1], "arrival rate"))
    elif tokens[0] == "burst":
        if len(tokens) != 4:
            raise ParseError(lineno, "burst arrivals are: burst size spacing order")
        try:
            size = int(tokens[1])
        except ValueError:
            raise ParseError(lineno, f"burst size must be an integer, got {tokens[1]!r}") from None
        spacing = _number(lineno, tokens[2], "burst spacing")
        order = None if tokens[3] == "-" else tuple(tokens[3].split(","))
        arrivals = Burst(size, spacing, order)
    else:
        raise ParseError(lineno, f"unknown arrival process {tokens[0]!r}")

    horizon = 60_000.0
    if "horizon" in sections:
        if len(sections["horizon"]) != 1 or len(sections["horizon"][0][1]) != 1:
            where = sections["horizon"][0][0] if sections["horizon"] else 0
            raise ParseError(where, "the horizon section holds a single number")
        lineno, tokens = sections["horizon"][0]
        horizon = _number(lineno, tokens[0], "horizon")

    net = PetriNet(
        places=frozenset(places),
        transitions=transitions,
        arcs=frozenset(arcs),
        entry=entry,
        exit=exit_,
        transition_probabilities=probabilities,
    )
    model = SimulationModel(net=net, timing=timing, arrivals=arrivals,
                            classes=tuple(classes), horizon=horizon)

    untimed = sorted(set(net.label_index) - set(timing))
    if untimed:
        raise MissingTiming(f"labelled task(s) without timing: {', '.join(untimed)}")
    report = validate_model(model)
    if not report.ok:
        raise ValidationFailed(report)
    return model


def parse_model(path: str | Path) -> SimulationModel:
    """Parse a model file; ``builtin:<name>`` loads a bundled model."""
    name = str(path)
    if name.startswith(BUILTIN_PREFIX):
        return load_bundled(name[len(BUILTIN_PREFIX):])
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(0, f"cannot read {path}: {exc}") from None
    return parse_model_text(text)


def _fmt(x: float) -> str:
    return repr(float(x))


def emit_model(model: SimulationModel) -> str:
    """Render a model in the sectioned format; parse_model_text inverts this."""
    net = model.net
    lines: list[str] = ["[places]"]
    lines.extend(sorted(net.places))
    lines.append("")
    lines.append("[transitions]")
    for tid in sorted(net.transitions):
        label = net.transitions[tid].label or "-"
        lines.append(f"{tid} {label} {_fmt(net.transition_probabilities[tid])}")
    lines.append("")
    lines.append("[arcs]")
    lines.extend(f"{src} -> {dst}" for src, dst in sorted(net.arcs))
    lines.append("")
    lines.append("[entry]")
    lines.extend(f"{place} {_fmt(p)}" for place, p in sorted(net.entry.items()))
    lines.append("")
    lines.append("[exit]")
    lines.extend(f"{place} {_fmt(p)}" for place, p in sorted(net.exit.items()))
    lines.append("")
    if model.classes:
        lines.append("[classes]")
        for c in model.classes:
            route = ",".join(f"{place}={tid}" for place, tid in sorted(c.route.items())) or "-"
            lines.append(f"{c.name} {_fmt(c.mix)} {route}")
        lines.append("")
    lines.append("[timing]")
    for label in sorted(model.timing):
        spec = model.timing[label]
        dist = spec.distribution
        if isinstance(dist, Deterministic):
            body = f"{label} det {_fmt(dist.duration)} {spec.servers}"
        else:
            body = f"{label} exp {_fmt(dist.rate)} {spec.servers}"
        if spec.center_type is not None:
            body += f" type {spec.center_type}"
        lines.append(body)
    lines.append("")
    lines.append("[arrivals]")
    arrivals = model.arrivals
    if isinstance(arrivals, Poisson):
        lines.append(f"poisson {_fmt(arrivals.rate)}")
    else:
        order = ",".join(arrivals.class_order) if arrivals.class_order else "-"
        lines.append(f"burst {arrivals.cases_per_burst} {_fmt(arrivals.spacing)} {order}")
    lines.append("")
    lines.append("[horizon]")
    lines.append(_fmt(model.horizon))
    lines.append("")
    return "\n".join(lines)


def bundled_model_names() -> list[str]:
    root = resources.files("redesignlab") / "models"
    return sorted(p.name[:-len(".model")] for p in root.iterdir() if p.name.endswith(".model"))


def load_bundled(name: str) -> SimulationModel:
    source = resources.files("redesignlab") / "models" / f"{name}.model"
    try:
        text = source.read_text(encoding="utf-8")
    except (FileNotFoundError, OSError):
        known = ", ".join(bundled_model_names())
        raise ParseError(0, f"no bundled model {name!r} (available: {known})") from None
    return parse_model_text(text)


def parse_schedule(entries_path: str | Path, arrivals_path: str | Path) -> Schedule:
    """Read a schedule from two CSVs: case,task,resource,start,end and case,arrival."""
    entries: list[ScheduleEntry] = []
    try:
        with open(entries_path, newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            required = {"case", "task", "resource", "start", "end"}
            if reader.fieldnames is None or not required.issubset(reader.fieldnames):
                raise ParseError(1, f"schedule CSV needs columns {', '.join(sorted(required))}")
            for row in reader:
                entries.append(ScheduleEntry(
                    case=row["case"],
                    task=row["task"],
                    resource=row["resource"],
                    start=_number(reader.line_num, row["start"], "start"),
                    end=_number(reader.line_num, row["end"], "end"),
                ))
    except OSError as exc:
        raise ParseError(0, f"cannot read {entries_path}: {exc}") from None
    arrivals: dict[str, float] = {}
    try:
        with open(arrivals_path, newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames is None or not {"case", "arrival"}.issubset(reader.fieldnames):
                raise ParseError(1, "arrivals CSV needs columns case, arrival")
            for row in reader:
                arrivals[row["case"]] = _number(reader.line_num, row["arrival"], "arrival")
    except OSError as exc:
        raise ParseError(0, f"cannot read {arrivals_path}: {exc}") from None
    return Schedule(entries=tuple(entries), arrivals=arrivals)
