"""Throughput-time analysis of process redesigns.

Timed process models over labelled Petri nets, a replicated discrete-event
simulator, and an exact queueing-network route for state-machine models.
The redesign steps (task elimination, automation, parallel splitting) act on
models; the simulator and the analytic route measure their effect on mean
throughput time.
"""

from .bcmp import (
    AnalysisResult,
    BcmpNetwork,
    CenterSpec,
    ServiceCenter,
    center_mean_values,
    elimination_delta,
    mean_throughput_time,
    network_from_model,
    silent_path_probabilities,
    to_bcmp,
    traffic_equations,
)
from .errors import (
    AmbiguousLabel,
    InvalidModel,
    MissingTiming,
    NegativeDuration,
    NotAStateMachine,
    NotEnabled,
    ParseError,
    RedesignLabError,
    SingularSystem,
    UnknownCase,
    UnknownLabel,
    UnknownTransition,
    Unstable,
    UnsupportedDistribution,
    ValidationFailed,
)
from .model import (
    Burst,
    Deterministic,
    Exponential,
    Poisson,
    ServiceSpec,
    SimulationModel,
    build_counterexample,
    build_loopback,
    build_tandem,
    default_burst_spacing,
    validate_model,
)
from .modelfile import (
    bundled_model_names,
    emit_model,
    load_bundled,
    parse_model,
    parse_model_text,
    parse_schedule,
)
from .net import (
    CaseClass,
    Marking,
    PetriNet,
    Token,
    Transition,
    ValidationReport,
    Violation,
    enabled_transitions,
    fire,
    is_state_machine,
    resolve_label,
    validate_net,
)
from .redesign import automate_task, eliminate_task, parallelize_task, silence_label
from .schedule import (
    Schedule,
    ScheduleEntry,
    project_schedule,
    schedule_throughput,
    validate_schedule,
)
from .simulator import (
    UNSTABLE_FLAG,
    CaseRecord,
    ReplicationSummary,
    SweepRow,
    TraceEvent,
    estimate_utilization,
    replicate,
    simulate,
    simulate_with_trace,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "AmbiguousLabel",
    "AnalysisResult",
    "BcmpNetwork",
    "Burst",
    "CaseClass",
    "CaseRecord",
    "CenterSpec",
    "Deterministic",
    "Exponential",
    "InvalidModel",
    "Marking",
    "MissingTiming",
    "NegativeDuration",
    "NotAStateMachine",
    "NotEnabled",
    "ParseError",
    "PetriNet",
    "Poisson",
    "RedesignLabError",
    "ReplicationSummary",
    "Schedule",
    "ScheduleEntry",
    "ServiceCenter",
    "ServiceSpec",
    "SimulationModel",
    "SingularSystem",
    "SweepRow",
    "Token",
    "TraceEvent",
    "Transition",
    "UNSTABLE_FLAG",
    "UnknownCase",
    "UnknownLabel",
    "UnknownTransition",
    "Unstable",
    "UnsupportedDistribution",
    "ValidationFailed",
    "ValidationReport",
    "Violation",
    "automate_task",
    "build_counterexample",
    "build_loopback",
    "build_tandem",
    "bundled_model_names",
    "center_mean_values",
    "default_burst_spacing",
    "elimination_delta",
    "eliminate_task",
    "emit_model",
    "enabled_transitions",
    "estimate_utilization",
    "fire",
    "is_state_machine",
    "load_bundled",
    "mean_throughput_time",
    "network_from_model",
    "parallelize_task",
    "parse_model",
    "parse_model_text",
    "parse_schedule",
    "project_schedule",
    "replicate",
    "resolve_label",
    "schedule_throughput",
    "silence_label",
    "silent_path_probabilities",
    "simulate",
    "simulate_with_trace",
    "sweep",
    "to_bcmp",
    "traffic_equations",
    "validate_model",
    "validate_net",
    "validate_schedule",
    "__version__",
]
