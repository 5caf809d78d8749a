"""Per-round cluster formation for the layered protocols and the LEACH baselines."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ClusterAssignment, NodeState, Protocol, Role

FIRST_LAYER_FRACTION = 0.02
LAYER_FRACTION = 0.05
MIN_GATEWAYS = 2
CAP_SHRINK = 0.9


def k_opt_first_layer(n1: int) -> int:
    """Gateway count for the layer nearest the sink (at least two)."""
    if n1 <= 0:
        return 0
    return max(MIN_GATEWAYS, math.ceil(FIRST_LAYER_FRACTION * n1))


def k_opt_layer(n_i: int, k_prev: int) -> int:
    """CH count for a deeper layer given the count of the layer in front of it."""
    if n_i <= 0:
        return 0
    return min(n_i, math.ceil(LAYER_FRACTION * n_i + 0.5 * k_prev))


def cluster_cap(n_i: int, k_opt_i: int) -> int:
    """Largest member count a CH accepts before overflow assignment."""
    return math.ceil(((n_i - k_opt_i) // k_opt_i) * CAP_SHRINK)


def dormant_count(n1: int, k_opt1: int) -> int:
    return max(0, (n1 - k_opt1) // 2)


def epoch_length(p: float) -> int:
    return max(1, round(1 / p))


def _raw_threshold(p: float, r: int) -> float:
    # exceeds 1 late in the epoch when 1/p is not an integer
    return p / (1 - p * (r % epoch_length(p)))


def leach_threshold(p: float, r: int, in_g: bool) -> float:
    if not in_g:
        return 0.0
    return min(1.0, _raw_threshold(p, r))


def eleach_threshold(p: float, r: int, in_g: bool, e: float, e_m: float) -> float:
    if not in_g:
        return 0.0
    return min(1.0, _raw_threshold(p, r) * (e / e_m))


@dataclass
class ElectionState:
    """Tracks when each node last served as CH.

    A node belongs to the eligible set G when it has never been CH or its last
    term is at least one epoch (``round(1/p)`` rounds) in the past.
    """

    last_ch: dict[int, int] = field(default_factory=dict)

    def in_g(self, node_id: int, r: int, p: float) -> bool:
        last = self.last_ch.get(node_id)
        return last is None or r - last >= epoch_length(p)

    def eligible(self, node_ids, r: int, p: float) -> list[bool]:
        epoch = epoch_length(p)
        last = self.last_ch
        return [i not in last or r - last[i] >= epoch for i in node_ids]

    def mark(self, node_ids, r: int) -> None:
        for i in node_ids:
            self.last_ch[i] = r


def _lottery(alive, draws, eligible, variant, p, r) -> list[NodeState]:
    """Nodes whose uniform draw falls below their threshold."""
    base = _raw_threshold(p, r)
    if variant in (Protocol.PROPOSE2, Protocol.ELEACH):
        return [
            n for n, u, g in zip(alive, draws, eligible)
            if g and u < base * (n.energy / n.initial_energy)
        ]
    return [n for n, u, g in zip(alive, draws, eligible) if g and u < base]


def _node_id(node: NodeState) -> int:
    return node.id


def _neg_energy(node: NodeState) -> float:
    return -node.energy


def _top_energy(pool: list[NodeState], count: int) -> list[NodeState]:
    """``count`` highest-energy nodes; ``pool`` is id-ordered so ties keep the lowest id."""
    return sorted(pool, key=_neg_energy)[:count]


def elect_cluster_heads(
    layer_nodes: list[NodeState],
    k_target: int,
    variant: Protocol,
    election: ElectionState,
    rng: np.random.Generator,
    r: int,
) -> list[int]:
    """Run the CH lottery over one layer and adjust the result to ``k_target`` heads.

    The layer's effective election probability is ``k_target / n``.  Extra
    winners are trimmed keeping the highest residual energies; a shortfall is
    filled from eligible non-winners, then from any alive node, by descending
    energy (lowest id on ties).  Elected ids are recorded in ``election``.
    """
    alive = sorted((n for n in layer_nodes if n.role is not Role.DEAD), key=_node_id)
    if k_target <= 0 or not alive:
        return []
    k_target = min(k_target, len(alive))
    if k_target == len(alive):
        heads = [n.id for n in alive]
        election.mark(heads, r)
        return heads

    p = k_target / len(alive)
    draws = rng.random(len(alive)).tolist()
    eligible = election.eligible([n.id for n in alive], r, p)
    winners = _lottery(alive, draws, eligible, variant, p, r)
    if len(winners) > k_target:
        chosen = _top_energy(winners, k_target)
    else:
        chosen = list(winners)
        taken = {n.id for n in chosen}
        pools = (
            [n for n, g in zip(alive, eligible) if g and n.id not in taken],
            [n for n, g in zip(alive, eligible) if not g],
        )
        for pool in pools:
            need = k_target - len(chosen)
            if need <= 0:
                break
            chosen.extend(_top_energy(pool, need))
    heads = sorted(n.id for n in chosen)
    election.mark(heads, r)
    return heads


def _nearest(members: list[int], heads: list[int], dmat) -> list[int]:
    """Nearest head per member (lowest id on exact ties; ``heads`` sorted)."""
    if not members:
        return []
    d = np.asarray(dmat)[np.ix_(members, heads)]
    return [heads[j] for j in d.argmin(axis=1).tolist()]


def form_clusters(
    members: list[int],
    heads: list[int],
    cap: int,
    dmat,
) -> dict[int, int]:
    """Attach members to heads under a per-head cap, then overflow to the nearest head.

    Members are served in ascending distance to their nearest head; each takes
    the nearest head that still has room.  Whoever finds every head full joins
    its nearest head regardless of the cap.
    """
    if not members:
        return {}
    if not heads:
        raise ValueError("cannot form clusters without heads")
    heads = sorted(heads)
    members = sorted(members)  # stable sorts below then break distance ties by id
    d = np.asarray(dmat)[np.asarray(members)[:, None], heads]
    ranks = np.argsort(d, axis=1, kind="stable")
    order = np.argsort(d.min(axis=1), kind="stable").tolist()
    ranks = ranks.tolist()
    load = [0] * len(heads)
    out: dict[int, int] = {}
    overflow = []
    for row in order:
        for j in ranks[row]:
            if load[j] < cap:
                load[j] += 1
                out[members[row]] = heads[j]
                break
        else:
            overflow.append(row)
    for row in overflow:
        out[members[row]] = heads[ranks[row][0]]
    return out


def select_first_layer_roles(
    nodes: list[NodeState],
    k_opt1: int,
    dormant_k: int,
    to_sink: list[float],
    dmat,
) -> tuple[list[int], list[int], dict[int, int]]:
    """Pick gateways, then dormant nodes, then attach the rest to their nearest gateway.

    Ranking is by residual energy (high first), then sink distance, then id.
    """
    alive = [n for n in nodes if n.alive]
    ranked = sorted(alive, key=lambda n: (-n.energy, to_sink[n.id], n.id))
    gateways = sorted(n.id for n in ranked[:k_opt1])
    dormant = sorted(n.id for n in ranked[k_opt1 : k_opt1 + dormant_k])
    rest = [n.id for n in ranked[k_opt1 + dormant_k :]]
    members = dict(zip(rest, _nearest(rest, gateways, dmat))) if gateways else {}
    return gateways, dormant, members


def layered_round_setup(
    nodes: list[NodeState],
    variant: Protocol,
    election: ElectionState,
    rng: np.random.Generator,
    r: int,
    to_sink: list[float],
    dmat,
) -> ClusterAssignment:
    """Cluster every layer for one round of the layered protocols.

    Expects ``node.layer`` to be current.  Layer 1 gets gateways and dormant
    nodes and is not clustered; deeper layers elect ``k_opt_layer`` heads,
    chained from the count of the layer in front.
    """
    by_layer: dict[int, list[NodeState]] = {}
    for n in nodes:
        if n.role is not Role.DEAD:
            by_layer.setdefault(n.layer, []).append(n)
    out = ClusterAssignment()
    if not by_layer:
        return out

    first = by_layer.get(1, [])
    k_prev = min(k_opt_first_layer(len(first)), len(first))
    if first:
        gateways, dormant, members = select_first_layer_roles(
            first, k_prev, dormant_count(len(first), k_prev), to_sink, dmat
        )
        out.gateways = gateways
        out.dormant = dormant
        out.members.update(members)

    for layer in range(2, max(by_layer) + 1):
        group = by_layer.get(layer, [])
        k = k_opt_layer(len(group), k_prev)
        k_prev = k
        if not group:
            continue
        heads = elect_cluster_heads(group, k, variant, election, rng, r)
        out.heads[layer] = heads
        head_set = set(heads)
        rest = [n.id for n in group if n.id not in head_set]
        out.members.update(form_clusters(rest, heads, cluster_cap(len(group), k), dmat))
    return out


def baseline_round_setup(
    nodes: list[NodeState],
    protocol: Protocol,
    election: ElectionState,
    rng: np.random.Generator,
    r: int,
    dmat,
    p: float = 0.05,
) -> ClusterAssignment:
    """Network-wide LEACH / E-LEACH lottery with uncapped nearest-CH membership.

    If nobody wins, every alive node goes straight to the sink this round.
    """
    alive = sorted((n for n in nodes if n.role is not Role.DEAD), key=_node_id)
    out = ClusterAssignment()
    if not alive:
        return out
    draws = rng.random(len(alive)).tolist()
    eligible = election.eligible([n.id for n in alive], r, p)
    heads = [n.id for n in _lottery(alive, draws, eligible, protocol, p, r)]
    election.mark(heads, r)
    if not heads:
        out.direct = [n.id for n in alive]
        return out
    out.heads[0] = heads
    head_set = set(heads)
    rest = [n.id for n in alive if n.id not in head_set]
    out.members = dict(zip(rest, _nearest(rest, heads, dmat)))
    return out
