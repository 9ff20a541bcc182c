"""Acceptance gate: one test per shipped guarantee, run at its stated
tolerance. Each test ends by printing a single PASS line; pytest -v adds
the authoritative per-test verdict."""

from __future__ import annotations

import math
import random
import time

import numpy as np
import pytest

from generators import random_schedule, random_state_machine
from gridsim import burst_arrival_list, grid_simulate
from pathenum import geometric_net, silent_path_sums
from redesignlab import (
    Burst,
    SingularSystem,
    build_counterexample,
    build_loopback,
    build_tandem,
    eliminate_task,
    elimination_delta,
    mean_throughput_time,
    network_from_model,
    project_schedule,
    replicate,
    schedule_throughput,
    silent_path_probabilities,
    simulate,
    simulate_with_trace,
    sweep,
    to_bcmp,
    traffic_equations,
    validate_schedule,
)

QUIET_BURST = Burst(4, 10_000.0, ("blue", "red", "blue", "red"))


def report(criterion: int, detail: str) -> None:
    print(f"criterion {criterion}: PASS ({detail})", flush=True)


def test_criterion_1_burst_oracle_is_hit_exactly():
    """A four-case burst completes at hand-computable times, tolerance zero."""
    started = time.perf_counter()
    # Hand trace: upper branch B(5)+A(5) or R(5)+A(5) against lower P(5)+P'(5),
    # one resource per task, all four cases arriving together at t=0.
    expected = {
        False: ([10.0, 15.0, 20.0, 25.0], 17.5),
        True: ([15.0, 15.0, 20.0, 25.0], 18.75),
    }
    for eliminated, (completions, mean) in expected.items():
        model = build_counterexample(
            eliminated=eliminated, arrivals=QUIET_BURST, horizon=1000.0)
        records = simulate(model, seed=1)
        got = sorted(r.completion for r in records)
        assert got == completions
        assert math.fsum(r.throughput for r in records) / len(records) == mean
        # The independent step-by-step reference engine agrees on every case.
        arrivals = burst_arrival_list(4, 10_000.0, 1000.0, QUIET_BURST.class_order)
        oracle = grid_simulate(model, arrivals)
        assert sorted(c for _, _, c in oracle) == completions
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    report(1, f"means 17.5 and 18.75 exact, both engines, {elapsed:.2f}s")


def test_criterion_2_elimination_slows_the_congested_grid():
    """Somewhere on the interarrival grid 6..12 the reduced model is slower,
    with non-overlapping 95% confidence intervals over 30 replications of
    1000 simulated hours each."""
    grid = tuple(float(g) for g in range(6, 13))
    original = build_counterexample(eliminated=False, horizon=60_000.0)
    eliminated = build_counterexample(eliminated=True, horizon=60_000.0)
    rows = sweep(original, eliminated, grid, reps=30, base_seed=0)
    assert [row.interarrival for row in rows] == list(grid)
    slower = [
        row for row in rows
        if not row.flags
        and row.mean_eliminated > row.mean_original
        and row.mean_eliminated - row.ci_eliminated
        > row.mean_original + row.ci_original
    ]
    assert slower, "no stable grid point separates the variants"
    where = ", ".join(
        f"{row.interarrival:g} min (+{row.mean_eliminated - row.mean_original:.3f})"
        for row in slower)
    report(2, f"confidently slower at interarrival {where}")


def test_criterion_3_simulation_meets_the_analytic_tandem():
    """30 replications of the three-stage tandem bracket the exact value."""
    model = build_tandem((2.0, 3.0, 4.0), arrival_rate=1.0, horizon=12_000.0)
    exact = mean_throughput_time(network_from_model(model, 1.0)).total
    assert exact == pytest.approx(11.0 / 6.0, rel=1e-12)
    summary = replicate(model, reps=30, base_seed=11)
    error = abs(summary.mean - exact)
    assert error <= summary.ci_half_width, "CI misses the analytic value"
    assert error / exact < 0.05
    report(3, f"simulated {summary.mean:.4f} +- {summary.ci_half_width:.4f} "
              f"vs exact {exact:.4f}, relerr {error / exact:.2%}")


def test_criterion_4_elimination_never_hurts_sequential_models():
    """On 100+ random stable state machines, dropping a task never raises the
    mean throughput time, and the saving equals that center's own share."""
    rng = random.Random(2024)
    checked = 0
    attempts = 0
    while checked < 100:
        attempts += 1
        assert attempts < 300, "generator kept producing degenerate nets"
        try:
            net, timing = random_state_machine(rng)
            label = rng.choice(sorted(timing))
            full = mean_throughput_time(to_bcmp(net, timing, 1.0))
            before, after, delta = elimination_delta(net, timing, 1.0, label)
        except SingularSystem:
            continue
        assert after <= before + 1e-9
        tid = next(t for t, name in full.labels.items() if name == label)
        share = full.throughput[tid] / 1.0 * full.sojourn[tid]
        assert abs(delta - share) <= 1e-9
        checked += 1
    report(4, f"{checked} nets ({attempts - checked} redraws), "
              f"monotone and delta = visit rate x sojourn to 1e-9")


def test_criterion_5_projected_schedules_stay_feasible_and_no_slower():
    """Dropping a task's entries from 1000+ feasible schedules leaves every
    schedule feasible for the reduced model and no case slower."""
    rng = random.Random(909)
    reduced = eliminate_task(build_counterexample(), "R")
    cases_seen = 0
    for _ in range(1000):
        model, schedule = random_schedule(rng)
        assert validate_schedule(model, schedule).ok
        projected = project_schedule(schedule, {"R"})
        assert validate_schedule(reduced, projected).ok
        before = schedule_throughput(schedule)
        after = schedule_throughput(projected)
        assert set(after) == set(before)
        for case, total in before.items():
            assert after[case] <= total + 1e-12
        cases_seen += len(before)
    report(5, f"1000 schedules, {cases_seen} cases, projection monotone")


def test_criterion_6_silent_loops_sum_their_geometric_series():
    """Closed-form silent-path sums match a literal path enumeration."""
    depth = 40
    for r in (0.1, 0.5, 0.9):
        # Retry loop: the exact solver must see the full geometric series.
        exact = silent_path_probabilities(geometric_net(r))
        assert abs(exact[("t_in", "t_out")] - 1.0) <= 1e-12
        listed = silent_path_sums(geometric_net(r), depth)["t_in"]["t_out"]
        assert abs(listed - (1.0 - r ** (depth + 1))) <= 1e-12
        assert 0.0 <= exact[("t_in", "t_out")] - listed <= r ** (depth + 1) + 1e-12

        # Loop back in front of a task: visited 1/(1-r) times on average.
        model = build_loopback(r)
        pairs = silent_path_probabilities(model.net)
        assert abs(pairs[("t_C", "t_C")] - r) <= 1e-12
        back = silent_path_sums(model.net, depth)["t_C"]
        assert abs(back["t_C"] - r) <= 1e-12
        assert abs(back[None] - (1.0 - r)) <= 1e-12
        lam = traffic_equations(network_from_model(model, 1.0))
        assert abs(lam["t_C"] - 1.0 / (1.0 - r)) <= 1e-12 / (1.0 - r)
    report(6, "retry and loopback sums exact to 1e-12, enumeration to depth 40")


def test_criterion_7_determinism_conservation_and_residuals():
    """Fixed seeds reproduce traces bit for bit, every arrival is accounted
    for, and solved traffic obeys its own equations to 1e-9."""
    model = build_counterexample(horizon=2000.0)

    first_records, first_trace = simulate_with_trace(model, seed=42)
    second_records, second_trace = simulate_with_trace(model, seed=42)
    assert first_trace == second_trace
    assert first_records == second_records
    _, other_trace = simulate_with_trace(model, seed=43)
    assert first_trace != other_trace

    completed = sum(1 for r in first_records if r.completion is not None)
    in_flight = sum(1 for r in first_records if r.completion is None)
    assert completed + in_flight == len(first_records)
    arrive_events = sum(1 for e in first_trace if e.kind == "arrive")
    complete_events = sum(1 for e in first_trace if e.kind == "complete")
    assert arrive_events == len(first_records)
    assert complete_events == completed

    rng = random.Random(55)
    worst = 0.0
    solved = 0
    while solved < 50:
        try:
            net, timing = random_state_machine(rng)
            network = to_bcmp(net, timing, 1.0)
            lam = traffic_equations(network)
        except SingularSystem:
            continue
        ids = [c.id for c in network.centers]
        routing = np.array([[network.routing.get((src, dst), 0.0)
                             for dst in ids] for src in ids])
        demand = network.external_rate * np.array(
            [network.entry.get(cid, 0.0) for cid in ids])
        rates = np.array([lam[cid] for cid in ids])
        residual = float(np.max(np.abs(
            (np.eye(len(ids)) - routing.T) @ rates - demand)))
        worst = max(worst, residual)
        solved += 1
    assert worst < 1e-9
    report(7, f"traces bit-identical, {arrive_events} arrivals = "
              f"{complete_events} completions + {in_flight} in flight, "
              f"worst residual {worst:.2e}")
