"""Per-round invariant checks shared by the property tests and the acceptance suite."""

from __future__ import annotations

import math

from hypothesis import strategies as st

from wsn_lifesim.core import SINK, NetworkConfig, Position, Protocol, Role, SinkMode
from wsn_lifesim.engine import Simulation
from wsn_lifesim.protocols import cluster_cap, dormant_count, k_opt_first_layer, k_opt_layer
from wsn_lifesim.routing import hop_depths


@st.composite
def small_configs(draw, max_nodes: int = 30):
    """Random small networks that die within a few dozen rounds."""
    w = draw(st.floats(20.0, 300.0))
    h = draw(st.floats(20.0, 300.0))
    mobile = draw(st.booleans())
    sink = draw(
        st.one_of(
            st.none(),
            st.builds(Position, st.floats(-200.0, 500.0), st.floats(-200.0, 500.0)),
        )
    )
    return NetworkConfig(
        field_width=w,
        field_height=h,
        node_count=draw(st.integers(1, max_nodes)),
        initial_energy=draw(st.floats(0.002, 0.05)),
        sink_mode=SinkMode.MOBILE if mobile else SinkMode.STATIC,
        sink_initial=sink,
        sink_speed=draw(st.floats(0.0, 150.0)),
        protocol=draw(st.sampled_from(list(Protocol))),
        rounds_max=draw(st.integers(1, 40)),
        rng_seed=draw(st.integers(0, 2**64 - 1)),
        next_hop_policy=draw(st.sampled_from(["score", "energy"])),
    )


def check_round(sim: Simulation) -> None:
    """Advance ``sim`` by one round and assert every per-round invariant."""
    nodes = sim.nodes
    ids = {n.id for n in nodes}
    dead_before = {n.id for n in nodes if n.role is Role.DEAD}
    energy_before = {n.id: n.energy for n in nodes}
    alive_before = len(ids) - len(dead_before)

    detail = sim.step()
    a = detail.assignment

    # role partition over the nodes alive at round start
    groups = [a.all_heads(), a.gateways, a.dormant, list(a.members), a.direct, sorted(dead_before)]
    flat = [i for g in groups for i in g]
    assert len(flat) == len(set(flat)), "role sets overlap"
    assert set(flat) == ids, "role sets do not cover every node"

    # layer quotas, and the cap: overflow only when every head of the layer is full
    if sim.config.protocol.layered:
        layer_of = {n.id: n.layer for n in nodes}
        per_layer: dict[int, int] = {}
        for i in ids - dead_before:
            per_layer[layer_of[i]] = per_layer.get(layer_of[i], 0) + 1
        n1 = per_layer.get(1, 0)
        k_prev = min(k_opt_first_layer(n1), n1)
        assert len(a.gateways) == k_prev
        assert len(a.dormant) == (dormant_count(n1, k_prev) if n1 else 0)
        for layer in range(2, max(per_layer, default=1) + 1):
            n_i = per_layer.get(layer, 0)
            k_prev = k_opt_layer(n_i, k_prev)
            heads = a.heads.get(layer, [])
            assert len(heads) == k_prev
            if not heads:
                continue
            load = {h: 0 for h in heads}
            for m, parent in a.members.items():
                if parent in load:
                    assert layer_of[m] == layer, "member attached across layers"
                    load[parent] += 1
            cap = cluster_cap(n_i, len(heads))
            if any(v > cap for v in load.values()):
                assert all(v >= cap for v in load.values()), "cap exceeded while a head had room"

    # forwarding tree: reaches the sink, relay hops strictly toward the sink
    tree = detail.tree
    hop_depths(tree)
    for layer, heads in a.heads.items():
        for h in heads:
            parent = tree[h]
            if parent != SINK:
                assert layer >= 2 and nodes[parent].layer < nodes[h].layer
    for d in a.dormant:
        assert d not in tree

    # energy ledger
    charges = detail.traffic.charges
    energy_after = {n.id: n.energy for n in nodes}
    spent = math.fsum(energy_before[i] - energy_after[i] for i in ids)
    total = math.fsum(charges.values())
    assert math.isclose(spent, total, rel_tol=1e-12, abs_tol=1e-15), (spent, total)
    assert math.isclose(detail.energy_before - detail.metrics.total_energy, total, rel_tol=1e-12, abs_tol=1e-12)
    for i in ids:
        assert math.isclose(energy_before[i] - energy_after[i], charges.get(i, 0.0), rel_tol=1e-12, abs_tol=1e-18)

    # monotone decay, absorbing death, dormant nodes untouched
    for n in nodes:
        assert 0.0 <= n.energy <= energy_before[n.id] <= n.initial_energy
        assert (n.role is Role.DEAD) == (n.energy == 0.0)
        if n.id in dead_before:
            assert n.role is Role.DEAD
    for d in a.dormant:
        assert d not in charges and energy_after[d] == energy_before[d]
    assert detail.metrics.alive <= alive_before
    assert detail.metrics.deaths_this_round == alive_before - detail.metrics.alive

    # if nobody died this round, at least one aggregated packet reached the sink
    if alive_before and detail.metrics.deaths_this_round == 0:
        assert detail.traffic.delivered >= 1


def check_run(config: NetworkConfig) -> int:
    sim = Simulation(config)
    rounds = 0
    while not sim.done():
        check_round(sim)
        rounds += 1
    return rounds

