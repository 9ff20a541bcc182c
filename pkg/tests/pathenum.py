"""Brute-force silent-path sums for state machines, used as an oracle.

Walks every path of up to ``max_hops`` silent transitions, multiplying edge
probabilities along the way. Probability mass on longer paths is dropped, so
for a net whose silent cycles have loop probability r the result undershoots
the exact value by at most r**(max_hops + 1).
"""

from __future__ import annotations

from redesignlab import PetriNet, Transition


def geometric_net(r: float) -> PetriNet:
    # One labelled task in, a silent self-loop retrying with probability r,
    # and a second labelled task out: the T -> U path sums a geometric series.
    return PetriNet(
        places=frozenset({"p0", "q", "p1"}),
        transitions={
            "t_in": Transition("t_in", "T"),
            "t_loop": Transition("t_loop", None),
            "t_out": Transition("t_out", "U"),
        },
        arcs=frozenset({
            ("p0", "t_in"), ("t_in", "q"),
            ("q", "t_loop"), ("t_loop", "q"),
            ("q", "t_out"), ("t_out", "p1"),
        }),
        entry={"p0": 1.0},
        exit={"p1": 1.0},
        transition_probabilities={"t_in": 1.0, "t_loop": r, "t_out": 1.0 - r},
    )


def silent_path_sums(net: PetriNet, max_hops: int) -> dict[str, dict[str | None, float]]:
    """Per labelled source: {target label id: probability}, None = departure."""
    out: dict[str, dict[str | None, float]] = {}
    p_t = net.transition_probabilities
    for src in net.labelled:
        sums: dict[str | None, float] = {}

        def walk(place: str, weight: float, hops: int) -> None:
            p_leave = net.exit.get(place, 0.0)
            if p_leave > 0.0:
                sums[None] = sums.get(None, 0.0) + weight * p_leave
            for tid in net.consumers[place]:
                w = weight * p_t[tid]
                if w == 0.0:
                    continue
                if net.transitions[tid].label is not None:
                    sums[tid] = sums.get(tid, 0.0) + w
                elif hops < max_hops:
                    walk(net.postset[tid][0], w, hops + 1)

        walk(net.postset[src][0], 1.0, 0)
        out[src] = sums
    return out
