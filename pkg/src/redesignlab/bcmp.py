"""Exact mean-value analysis of state-machine nets as open queueing networks.

A state-machine net (every transition has one input and one output place)
maps onto an open multi-station queueing network: labelled transitions
become service centers, and silent transitions only redistribute routing
probability. A path through silent transitions contributes the product of
its edge probabilities, and all paths between two centers are summed, so a
silent loop contributes a geometric series. Those sums are computed exactly
by solving one linear system per net instead of enumerating paths.

Supported center kinds:

1. FiFo queue, exponential service, c servers (Erlang-C waiting).
2. Processor sharing, single server.
3. Infinite servers (pure delay).
4. Preemptive-resume LCFS, single server.

Kinds 2-4 are insensitive to the service distribution beyond its mean, so
deterministic tasks can be analysed there. With Poisson external arrivals
each center can be evaluated in isolation from its own arrival rate, which
is what makes the analysis exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import InvalidModel, MissingTiming, NotAStateMachine, SingularSystem, Unstable
from .model import Deterministic, Exponential, SimulationModel
from .net import PetriNet, is_state_machine
from .redesign import silence_label

_MASS_TOL = 1e-6
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class CenterSpec:
    """Declared queueing parameters of one task: kind, service rate, servers."""

    center_type: int
    rate: float
    servers: int = 1


@dataclass(frozen=True)
class ServiceCenter:
    id: str
    label: str
    center_type: int
    rate: float
    servers: int = 1


@dataclass(frozen=True)
class BcmpNetwork:
    """An open network: centers, inter-center routing, entry and exit shares."""

    centers: tuple[ServiceCenter, ...]
    routing: dict[tuple[str, str], float]
    entry: dict[str, float]
    exit: dict[str, float]
    external_rate: float


@dataclass(frozen=True)
class AnalysisResult:
    """Per-center steady-state values and the network mean throughput time.

    ``total`` is the mean time a case spends in the process: the sum of the
    mean center populations divided by the external arrival rate (Little).
    """

    centers: tuple[str, ...]
    labels: dict[str, str]
    throughput: dict[str, float]
    utilization: dict[str, float]
    mean_number: dict[str, float]
    sojourn: dict[str, float]
    external_rate: float
    total: float

    def rows(self):
        for cid in self.centers:
            yield (cid, self.labels[cid], self.throughput[cid],
                   self.utilization[cid], self.sojourn[cid], self.mean_number[cid])


def _silent_solution(net: PetriNet):
    """Reach probabilities through silent transitions, solved exactly.

    For every place p and labelled transition t', x[p, t'] is the
    probability that a token sitting in p next fires t', moving through
    silent transitions only. The last column is the probability of leaving
    the net instead. Geometric sums over silent cycles appear as the inverse
    of (I - S) with S the one-step silent hop matrix.
    """
    if not is_state_machine(net):
        raise NotAStateMachine("the transformation requires |preset| = |postset| = 1 for every transition")
    places = sorted(net.places)
    index = {p: i for i, p in enumerate(places)}
    n = len(places)
    p_t = net.transition_probabilities
    hop = np.zeros((n, n))
    labelled = net.labelled
    columns = np.zeros((n, len(labelled) + 1))
    for tid, record in net.transitions.items():
        source = index[net.preset[tid][0]]
        if record.label is None:
            hop[source, index[net.postset[tid][0]]] += p_t[tid]
        else:
            columns[source, labelled.index(tid)] += p_t[tid]
    for place, p_leave in net.exit.items():
        columns[index[place], -1] += p_leave
    try:
        reach = np.linalg.solve(np.eye(n) - hop, columns)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("silent transitions form a cycle that traps all probability mass") from exc
    if np.any(reach > 1.0 + _MASS_TOL) or np.any(reach < -_MASS_TOL):
        raise SingularSystem("silent cycles leave the reach probabilities ill-conditioned")
    return places, index, labelled, reach


def silent_path_probabilities(net: PetriNet) -> dict[tuple[str, str], float]:
    """Probability of reaching t' next after t, over all silent paths.

    Returns every ordered pair of labelled transitions, including pairs with
    probability 0. Per source, the pair probabilities plus the probability
    of leaving the net sum to at most 1.
    """
    _, index, labelled, reach = _silent_solution(net)
    out: dict[tuple[str, str], float] = {}
    for src in labelled:
        row = index[net.postset[src][0]]
        for j, dst in enumerate(labelled):
            out[(src, dst)] = float(reach[row, j])
    return out


def to_bcmp(net: PetriNet, timing: Mapping[str, CenterSpec], external_rate: float) -> BcmpNetwork:
    """Map a state-machine net onto an open queueing network.

    ``timing`` is keyed by task label. Entry shares are entry-place
    probabilities carried through leading silent transitions; routing and
    exit shares follow the same silent-path sums.
    """
    _, index, labelled, reach = _silent_solution(net)
    missing = sorted({net.transitions[t].label for t in labelled} - set(timing))
    if missing:
        raise MissingTiming(f"no service parameters for task(s): {', '.join(missing)}")

    centers = []
    for tid in labelled:
        label = net.transitions[tid].label
        spec = timing[label]
        if spec.center_type not in (1, 2, 3, 4):
            raise InvalidModel(f"task {label}: unknown center type {spec.center_type}")
        if spec.rate <= 0:
            raise InvalidModel(f"task {label}: service rate must be > 0")
        if spec.center_type in (2, 4) and spec.servers != 1:
            raise InvalidModel(f"task {label}: center type {spec.center_type} is single-server")
        if spec.center_type == 1 and spec.servers < 1:
            raise InvalidModel(f"task {label}: needs at least one server")
        centers.append(ServiceCenter(tid, label, spec.center_type, spec.rate, spec.servers))

    entry: dict[str, float] = {}
    for j, tid in enumerate(labelled):
        q = 0.0
        for place, p_in in net.entry.items():
            q += p_in * reach[index[place], j]
        entry[tid] = q
    routing: dict[tuple[str, str], float] = {}
    exit_share: dict[str, float] = {}
    for src in labelled:
        row = index[net.postset[src][0]]
        for j, dst in enumerate(labelled):
            routing[(src, dst)] = float(reach[row, j])
        exit_share[src] = float(reach[row, -1])
        total = sum(routing[(src, dst)] for dst in labelled) + exit_share[src]
        if abs(total - 1.0) > RESIDUAL_TOL:
            raise SingularSystem(f"routing out of {src} sums to {total:.12g}")

    total_entry = sum(entry.values())
    if labelled and total_entry > 1.0 + RESIDUAL_TOL:
        raise SingularSystem(f"entry shares sum to {total_entry:.12g}")

    return BcmpNetwork(
        centers=tuple(centers),
        routing=routing,
        entry=entry,
        exit=exit_share,
        external_rate=external_rate,
    )


def traffic_equations(network: BcmpNetwork) -> dict[str, float]:
    """Per-center arrival rates: lambda = Lambda q + P^T lambda, solved exactly."""
    ids = [c.id for c in network.centers]
    n = len(ids)
    if n == 0:
        return {}
    routing = np.zeros((n, n))
    for i, src in enumerate(ids):
        for j, dst in enumerate(ids):
            routing[i, j] = network.routing.get((src, dst), 0.0)
    demand = network.external_rate * np.array([network.entry.get(cid, 0.0) for cid in ids])
    system = np.eye(n) - routing.T
    try:
        lam = np.linalg.solve(system, demand)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("traffic equations have no unique solution; the network is not open") from exc
    residual = float(np.max(np.abs(system @ lam - demand)))
    if residual > RESIDUAL_TOL:
        raise SingularSystem(f"traffic equation residual {residual:.3e} exceeds tolerance")
    if np.any(lam < -RESIDUAL_TOL):
        raise SingularSystem("traffic equations produced a negative arrival rate")
    return {cid: float(max(rate, 0.0)) for cid, rate in zip(ids, lam)}


def center_mean_values(center: ServiceCenter, throughput: float) -> tuple[float, float, float]:
    """Steady-state (utilisation, mean number, mean sojourn) of one center.

    Kind 1 uses the Erlang-C waiting probability; kinds 2 and 4 share the
    single-server form L = rho / (1 - rho); kind 3 is a pure delay. Raises
    Unstable when a finite-server center has utilisation >= 1.
    """
    mu = center.rate
    lam = throughput
    if center.center_type == 3:
        rho = lam / mu
        return rho, rho, 1.0 / mu
    if center.center_type in (2, 4):
        rho = lam / mu
        if rho >= 1.0:
            raise Unstable(f"center {center.id} has utilisation {rho:.6g}", center.id)
        sojourn = (1.0 / mu) / (1.0 - rho)
        return rho, rho / (1.0 - rho), sojourn
    c = center.servers
    offered = lam / mu
    rho = offered / c
    if rho >= 1.0:
        raise Unstable(f"center {center.id} has utilisation {rho:.6g}", center.id)
    # Erlang C: probability that an arriving case has to wait.
    term = 1.0
    below = 0.0
    for k in range(c):
        below += term
        term *= offered / (k + 1)
    wait_prob = term / ((1.0 - rho) * below + term)
    sojourn = wait_prob / (c * mu - lam) + 1.0 / mu
    return rho, lam * sojourn, sojourn


def mean_throughput_time(network: BcmpNetwork) -> AnalysisResult:
    """Solve the whole network and apply Little's law to the case population."""
    lam = traffic_equations(network)
    utilization: dict[str, float] = {}
    mean_number: dict[str, float] = {}
    sojourn: dict[str, float] = {}
    for center in network.centers:
        rho, number, wait = center_mean_values(center, lam[center.id])
        utilization[center.id] = rho
        mean_number[center.id] = number
        sojourn[center.id] = wait
    total = sum(mean_number.values()) / network.external_rate if network.centers else 0.0
    return AnalysisResult(
        centers=tuple(c.id for c in network.centers),
        labels={c.id: c.label for c in network.centers},
        throughput=lam,
        utilization=utilization,
        mean_number=mean_number,
        sojourn=sojourn,
        external_rate=network.external_rate,
        total=total,
    )


def elimination_delta(net: PetriNet, timing: Mapping[str, CenterSpec],
                      external_rate: float, label: str) -> tuple[float, float, float]:
    """Mean throughput time before and after eliminating ``label``.

    Returns (before, after, before - after). Making a task silent does not
    change any other center's arrival rate, so the delta equals the
    eliminated center's contribution lambda_j / Lambda x W_j and is never
    negative for a stable model.
    """
    before = mean_throughput_time(to_bcmp(net, timing, external_rate)).total
    reduced = {k: v for k, v in timing.items() if k != label}
    after = mean_throughput_time(to_bcmp(silence_label(net, label), reduced, external_rate)).total
    return before, after, before - after


def network_from_model(model: SimulationModel, external_rate: float) -> BcmpNetwork:
    """Derive center parameters from a simulation model's service specs.

    Without an explicit declaration, exponential tasks become FiFo centers
    (kind 1) and deterministic tasks processor-sharing centers (kind 2),
    where only the mean matters. Deterministic tasks with several servers
    have no default and must declare their kind.
    """
    timing: dict[str, CenterSpec] = {}
    for label, spec in model.timing.items():
        dist = spec.distribution
        if isinstance(dist, Exponential):
            rate = dist.rate
            kind = spec.center_type if spec.center_type is not None else 1
        else:
            assert isinstance(dist, Deterministic)
            if dist.duration <= 0:
                raise InvalidModel(f"task {label}: zero-duration tasks cannot be analysed; eliminate them instead")
            rate = 1.0 / dist.duration
            if spec.center_type is not None:
                kind = spec.center_type
            elif spec.servers == 1:
                kind = 2
            else:
                raise InvalidModel(f"task {label}: declare a center type for multi-server deterministic service")
        servers = spec.servers if kind == 1 else 1
        timing[label] = CenterSpec(kind, rate, servers)
    return to_bcmp(model.net, timing, external_rate)
