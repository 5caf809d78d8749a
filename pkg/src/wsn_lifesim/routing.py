"""Forwarding tree construction and per-round traffic execution."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SINK, ClusterAssignment, NodeState, RadioParams, Role
from .energy import charge, cpu_cost, death_threshold, rx_cost, tx_cost_array

SCORE_EPSILON = 1.0  # m^2, keeps the score finite for co-located nodes


def next_hop(
    ch: NodeState,
    candidates: list[NodeState],
    dmat,
    policy: str = "score",
) -> int:
    """Best relay among ``candidates`` for ``ch``, or ``SINK`` if none is alive.

    ``"score"`` maximises ``energy / (d**2 + 1)``; ``"energy"`` picks the
    highest residual energy and breaks ties by distance.  Remaining ties go
    to the lowest id.
    """
    row = dmat[ch.id]
    alive = [c for c in candidates if c.alive]
    if not alive:
        return SINK
    if policy == "energy":
        key = lambda c: (-c.energy, row[c.id], c.id)  # noqa: E731
    else:
        key = lambda c: (-c.energy / (row[c.id] ** 2 + SCORE_EPSILON), c.id)  # noqa: E731
    return min(alive, key=key).id


class ForwardingTree(dict):
    """Node id -> parent id, carrying the hop depths computed when it was validated."""

    depth: dict[int, int] | None = None


def build_forwarding_tree(
    assignment: ClusterAssignment,
    nodes: list[NodeState],
    dmat,
    policy: str = "score",
) -> dict[int, int]:
    """Map every transmitting node to its parent id (``SINK`` for the sink).

    Heads in layer ``i`` relay through the nearest nearer layer that has heads
    (gateways for layer 1); with no such layer they go straight to the sink.
    Baseline heads (layer key 0) always go to the sink.  Dormant nodes are
    absent from the tree.
    """
    tree = ForwardingTree()
    for g in assignment.gateways:
        tree[g] = SINK
    for i in assignment.direct:
        tree[i] = SINK
    relays: dict[int, list[NodeState]] = {
        layer: [nodes[h] for h in heads] for layer, heads in assignment.heads.items() if heads
    }
    if assignment.gateways:
        relays[1] = [nodes[g] for g in assignment.gateways]
    for layer, heads in assignment.heads.items():
        nearer = [j for j in relays if 1 <= j < layer]
        candidates = relays[max(nearer)] if (layer > 0 and nearer) else []
        for h in heads:
            tree[h] = next_hop(nodes[h], candidates, dmat, policy) if candidates else SINK
    tree.update(assignment.members)
    layered = [h for layer, heads in assignment.heads.items() if layer >= 2 for h in heads]
    tree.depth = check_acyclic(tree, nodes, layered)
    return tree


def hop_depths(tree: dict[int, int]) -> dict[int, int]:
    """Hop count to the sink for every node in ``tree``; raises on cycles or dangling parents."""
    depth = {SINK: 0}
    limit = len(tree)
    for start in tree:
        if start in depth:
            continue
        path = [start]
        cur = tree[start]
        while cur not in depth:
            if cur not in tree or len(path) > limit:
                raise AssertionError(f"forwarding path from {start} does not reach the sink")
            path.append(cur)
            cur = tree[cur]
        hops = depth[cur]
        for i in reversed(path):
            hops += 1
            depth[i] = hops
    del depth[SINK]
    return depth


def check_acyclic(tree: dict[int, int], nodes: list[NodeState], relays=()) -> dict[int, int]:
    """Assert every path reaches the sink and relay hops strictly descend in layer.

    ``relays`` are the layered heads whose upstream hop must land in a nearer
    layer; member hops stay inside their own layer.  Returns the hop depths.
    """
    for i in relays:
        parent = tree[i]
        if parent != SINK and not nodes[parent].layer < nodes[i].layer:
            raise AssertionError(f"relay {i}->{parent} does not move toward the sink")
    return hop_depths(tree)


def traffic_order(tree: dict[int, int]) -> list[int]:
    """Leaf-to-root processing order: deepest hop count first, then id."""
    depth = getattr(tree, "depth", None) or hop_depths(tree)
    return sorted(tree, key=lambda i: (-depth[i], i))


@dataclass
class TrafficResult:
    charges: dict[int, float]
    delivered: int  # aggregated packets that reached the sink
    sent: int  # successful transmissions of any hop


def execute_round_traffic(
    tree: dict[int, int],
    nodes: list[NodeState],
    radio: RadioParams,
    to_sink,
    dmat,
) -> TrafficResult:
    """Move one round of data up the tree and charge energy along the way.

    Each node receives and processes its inbox packet by packet, then sends a
    single aggregated packet to its parent.  A transmission counts only if the
    sender could pay its full cost; a node that dies stops acting for the
    rest of the round.
    """
    k = radio.packet_bits
    eps = death_threshold(radio)
    rx = rx_cost(radio, k)
    cpu = cpu_cost(radio, k)
    per_packet = rx + cpu
    inbox = dict.fromkeys(tree, 0)
    charges: dict[int, float] = {}
    delivered = sent = 0
    if not tree:
        return TrafficResult(charges, delivered, sent)

    order = traffic_order(tree)
    parents = [tree[i] for i in order]
    src = np.asarray(order)
    dst = np.asarray(parents)
    hop = np.where(dst == SINK, np.asarray(to_sink)[src], np.asarray(dmat)[src, np.maximum(dst, 0)])
    costs = tx_cost_array(radio, k, hop).tolist()

    for i, parent, cost in zip(order, parents, costs):
        node = nodes[i]
        if node.role is Role.DEAD:
            continue
        spent = 0.0
        m = inbox[i]
        if m:
            if node.energy - m * per_packet >= eps:
                spent += charge(node, m * per_packet, eps)
            else:
                for _ in range(m):
                    spent += charge(node, rx, eps)
                    if node.role is Role.DEAD:
                        break
                    spent += charge(node, cpu, eps)
                    if node.role is Role.DEAD:
                        break
                if node.role is Role.DEAD:
                    charges[i] = spent
                    continue
        paid = node.energy >= cost
        if node.energy - cost >= eps:
            node.energy -= cost
            spent += cost
        else:
            spent += charge(node, cost, eps)
        if paid:
            sent += 1
            if parent == SINK:
                delivered += 1
            else:
                inbox[parent] += 1
        charges[i] = spent
    return TrafficResult(charges, delivered, sent)
