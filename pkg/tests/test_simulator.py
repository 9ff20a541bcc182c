"""Engine behaviour: oracle equivalence, determinism, conservation, queueing."""

from __future__ import annotations

import math
from dataclasses import replace

import pytest

from gridsim import burst_arrival_list, grid_simulate
from redesignlab import (
    Burst,
    Deterministic,
    InvalidModel,
    ServiceSpec,
    build_counterexample,
    build_loopback,
    build_tandem,
    estimate_utilization,
    parallelize_task,
    replicate,
    simulate,
    simulate_with_trace,
    sweep,
)

QUIET = Burst(4, 10_000.0, ("blue", "red", "blue", "red"))


def test_single_burst_hand_traced_times():
    # Four cases at t=0. The original finishes them at 10, 15, 20, 25; with R
    # eliminated the red cases overtake the first blue in front of A and the
    # completions shift to 15, 15, 20, 25.
    original = build_counterexample(arrivals=QUIET, horizon=1000.0)
    records = simulate(original, seed=1)
    assert sorted(r.completion for r in records) == [10.0, 15.0, 20.0, 25.0]
    eliminated = build_counterexample(eliminated=True, arrivals=QUIET, horizon=1000.0)
    records = simulate(eliminated, seed=1)
    assert sorted(r.completion for r in records) == [15.0, 15.0, 20.0, 25.0]


@pytest.mark.parametrize("eliminated", [False, True])
@pytest.mark.parametrize("size,order", [
    (1, ("blue",)),
    (2, ("blue", "red")),
    (3, ("red", "red", "blue")),
    (4, ("blue", "red", "blue", "red")),
    (5, ("blue", "blue", "red", "red", "blue")),
    (6, ("red", "blue", "blue", "red", "red", "blue")),
])
def test_engine_matches_reference_on_separated_bursts(eliminated, size, order):
    spacing, horizon = 240.0, 700.0
    model = build_counterexample(eliminated=eliminated,
                                 arrivals=Burst(size, spacing, order),
                                 horizon=horizon)
    got = [(r.case, r.arrival, r.completion) for r in simulate(model, seed=5)]
    want = grid_simulate(model, burst_arrival_list(size, spacing, horizon, order))
    assert got == want


@pytest.mark.parametrize("eliminated", [False, True])
def test_engine_matches_reference_under_backlog(eliminated):
    # Bursts faster than the drain time, so queues carry over between bursts.
    model = build_counterexample(eliminated=eliminated,
                                 arrivals=Burst(3, 12.0, ("blue", "red", "blue")),
                                 horizon=400.0)
    got = [(r.case, r.arrival, r.completion) for r in simulate(model, seed=2)]
    want = grid_simulate(model, burst_arrival_list(3, 12.0, 400.0, ("blue", "red", "blue")))
    assert got == want


def test_engine_matches_reference_after_parallelize():
    base = build_counterexample(arrivals=Burst(3, 240.0, ("blue", "red", "blue")),
                                horizon=700.0)
    model = parallelize_task(base, "A", 2)
    got = [(r.case, r.arrival, r.completion) for r in simulate(model, seed=8)]
    want = grid_simulate(model, burst_arrival_list(3, 240.0, 700.0, ("blue", "red", "blue")))
    assert got == want


def test_same_seed_same_run():
    model = build_counterexample(horizon=2000.0)
    assert simulate(model, seed=3) == simulate(model, seed=3)
    _, first = simulate_with_trace(model, seed=3)
    _, second = simulate_with_trace(model, seed=3)
    assert first == second


def test_different_seeds_differ():
    model = build_counterexample(horizon=2000.0)
    assert simulate(model, seed=3) != simulate(model, seed=4)


def test_trace_token_balance():
    model = build_counterexample(horizon=2000.0)
    records, trace = simulate_with_trace(model, seed=9)
    net = model.net
    balance: dict[int, int] = {}
    for event in trace:
        if event.kind == "arrive":
            balance[event.case] = balance.get(event.case, 0) + 1
        elif event.kind == "fire":
            balance[event.case] += len(net.postset[event.node]) - len(net.preset[event.node])
        elif event.kind == "depart":
            balance[event.case] -= 1
    completed = {r.case for r in records if r.completion is not None}
    assert set(balance) == {r.case for r in records}
    for case, count in balance.items():
        assert count == 0 if case in completed else count >= 1
    assert len([e for e in trace if e.kind == "arrive"]) == len(records)
    assert len([e for e in trace if e.kind == "complete"]) == len(completed)


def test_single_server_fifo_order():
    model = build_counterexample(horizon=2000.0)
    _, trace = simulate_with_trace(model, seed=12)
    enqueued = [e.case for e in trace if e.kind == "enqueue" and e.node == "t_A"]
    started = [e.case for e in trace if e.kind == "start" and e.node == "t_A"]
    assert started == enqueued[:len(started)]


def test_horizon_cuts_late_completions():
    # The first case of the burst completes at t=10; a horizon of 9 leaves
    # every case in flight.
    model = build_counterexample(arrivals=Burst(1, 10_000.0, ("blue",)), horizon=9.0)
    records = simulate(model, seed=1)
    assert len(records) == 1
    assert records[0].completion is None
    assert records[0].throughput is None


def test_mm1_mean_sojourn():
    # Single exponential server, rho = 0.5: mean sojourn 1/(mu - lambda) = 2.
    model = build_tandem((1.0,), arrival_rate=0.5, horizon=6000.0)
    summary = replicate(model, 5, base_seed=21)
    assert summary.mean == pytest.approx(2.0, rel=0.1)


def test_replicate_single_rep_has_zero_interval():
    model = build_counterexample(arrivals=QUIET, horizon=1000.0)
    summary = replicate(model, 1, base_seed=0)
    assert summary.ci_half_width == 0.0
    assert summary.mean == 17.5


def test_replicate_deterministic_model_has_zero_spread():
    model = build_counterexample(arrivals=QUIET, horizon=1000.0)
    summary = replicate(model, 4, base_seed=0)
    assert summary.rep_means == (17.5, 17.5, 17.5, 17.5)
    assert summary.ci_half_width == 0.0
    assert summary.completed == 16
    assert summary.in_flight == 0
    # blue cases complete at 10 and 20, red ones at 15 and 25
    assert summary.class_means == {"blue": 15.0, "red": 20.0}


def test_replicate_with_no_completions():
    model = build_counterexample(arrivals=Burst(1, 10_000.0, ("blue",)), horizon=9.0)
    summary = replicate(model, 3, base_seed=0)
    assert all(math.isnan(m) for m in summary.rep_means)
    assert math.isnan(summary.mean)
    assert summary.completed == 0
    assert summary.in_flight == 3


def test_replicate_rejects_zero_reps():
    with pytest.raises(ValueError):
        replicate(build_counterexample(), 0, base_seed=0)


def test_simulate_rejects_invalid_model():
    model = build_counterexample()
    broken = replace(model, timing={**model.timing, "A": ServiceSpec(Deterministic(-1.0))})
    with pytest.raises(InvalidModel):
        simulate(broken, seed=0)


def test_offered_load_counterexample():
    loads = estimate_utilization(build_counterexample())  # Poisson rate 1/6
    assert loads is not None
    assert loads["A"] == pytest.approx(5.0 / 6.0)
    assert loads["P"] == pytest.approx(5.0 / 6.0)
    assert loads["P'"] == pytest.approx(5.0 / 6.0)
    assert loads["R"] == pytest.approx(5.0 / 12.0)  # half the cases are red
    assert loads["B"] == pytest.approx(5.0 / 12.0)


def test_offered_load_eliminated_variant():
    loads = estimate_utilization(build_counterexample(eliminated=True))
    assert loads is not None
    assert "R" not in loads
    assert loads["A"] == pytest.approx(5.0 / 6.0)


def test_offered_load_respects_servers_and_rate():
    model = build_counterexample()
    doubled = replace(model, timing={**model.timing,
                                     "A": ServiceSpec(Deterministic(5.0), servers=2)})
    loads = estimate_utilization(doubled, arrival_rate=0.2)
    assert loads is not None
    assert loads["A"] == pytest.approx(0.5)
    assert loads["B"] == pytest.approx(0.5)


def test_offered_load_from_burst_rate():
    model = build_counterexample(arrivals=Burst(4, 240.0, None))
    loads = estimate_utilization(model)
    assert loads is not None
    assert loads["A"] == pytest.approx((4.0 / 240.0) * 5.0)


def test_offered_load_none_for_cycles():
    assert estimate_utilization(build_loopback()) is None


def test_sweep_flags_saturated_grid_points():
    original = replace(build_counterexample(), horizon=500.0)
    eliminated = replace(build_counterexample(eliminated=True), horizon=500.0)
    rows = sweep(original, eliminated, (5.0, 6.0), reps=1, base_seed=0)
    assert rows[0].flags == ("unstable",)
    assert rows[1].flags == ()


def test_sweep_uses_common_random_numbers():
    # Sweeping a model against itself must produce identical columns.
    model = replace(build_counterexample(), horizon=1000.0)
    rows = sweep(model, model, (8.0, 10.0), reps=2, base_seed=5)
    for row in rows:
        assert row.mean_original == row.mean_eliminated
        assert row.ci_original == row.ci_eliminated
