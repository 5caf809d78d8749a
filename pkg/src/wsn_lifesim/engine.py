"""Round loop, lifetime summaries and seed ensembles."""

from __future__ import annotations

import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ClusterAssignment,
    NetworkConfig,
    NodeState,
    Role,
    RoundMetrics,
    SinkMode,
    deploy_network,
    distance,
    distance_matrix,
    make_rng,
)
from .layering import Layering, layering_for_sink
from .protocols import ElectionState, baseline_round_setup, layered_round_setup
from .routing import TrafficResult, build_forwarding_tree, execute_round_traffic
from .sink import SinkState, advance_sink, initial_sink


@dataclass(frozen=True)
class LifetimeSummary:
    """Rounds at which the first node, half the nodes and the last node died.

    ``None`` means the event did not happen within ``rounds_executed``.
    """

    first_node_death: int | None
    half_nodes_death: int | None
    last_node_death: int | None
    rounds_executed: int


@dataclass
class RoundDetail:
    metrics: RoundMetrics
    assignment: ClusterAssignment
    tree: dict[int, int]
    traffic: TrafficResult
    energy_before: float


class Simulation:
    """One seeded run.  Call :meth:`step` per round or :meth:`run` to completion.

    Each round: move the sink (mobile mode, from round 2 on) and re-layer,
    form clusters, build the forwarding tree, run the traffic, record.
    """

    def __init__(self, config: NetworkConfig):
        self.config = config.validate()
        self.rng = make_rng(config.rng_seed)
        self.nodes: list[NodeState] = deploy_network(config, self.rng)
        self.dmat = distance_matrix(self.nodes)
        self._xy = np.array([(n.pos.x, n.pos.y) for n in self.nodes], dtype=float)
        self.election = ElectionState()
        self.sink: SinkState = initial_sink(config)
        self.round = 0
        self.layering: Layering | None = None
        self.to_sink: list[float] = []
        self.alive_count = len(self.nodes)
        self.energy = self.total_energy()
        self._relayer()

    def _relayer(self) -> None:
        pos = self.sink.pos
        d = np.hypot(self._xy[:, 0] - pos.x, self._xy[:, 1] - pos.y)
        self.to_sink = d.tolist()
        if self.config.protocol.layered:
            cfg = self.config
            self.layering = layering_for_sink(pos, cfg.field_width, cfg.field_height, cfg.layer_fraction)
            edges = np.array(self.layering.edges)
            layers = np.minimum(np.searchsorted(edges, d - self.layering.origin, side="left"), len(edges) - 1) + 1
            for n, layer in zip(self.nodes, layers.tolist()):
                n.layer = layer if n.role is not Role.DEAD else None

    def total_energy(self) -> float:
        return math.fsum(n.energy for n in self.nodes)

    def done(self) -> bool:
        return self.round >= self.config.rounds_max or self.alive_count == 0

    def _setup(self, r: int) -> ClusterAssignment:
        cfg = self.config
        if cfg.protocol.layered:
            return layered_round_setup(
                self.nodes, cfg.protocol, self.election, self.rng, r, self.to_sink, self.dmat
            )
        return baseline_round_setup(
            self.nodes, cfg.protocol, self.election, self.rng, r, self.dmat, cfg.p
        )

    def step(self) -> RoundDetail:
        cfg = self.config
        self.round += 1
        r = self.round - 1
        if self.round > 1 and self.sink.mode is SinkMode.MOBILE and self.sink.step_degrees:
            self.sink = advance_sink(self.sink)
            self._relayer()

        alive_before = self.alive_count
        energy_before = self.energy
        assignment = self._setup(r)
        for n in self.nodes:
            if n.role is not Role.DEAD:
                n.role = Role.MEMBER
        heads = assignment.all_heads()
        for h in heads:
            self.nodes[h].role = Role.CLUSTER_HEAD
        for g in assignment.gateways:
            self.nodes[g].role = Role.GATEWAY
        for d in assignment.dormant:
            self.nodes[d].role = Role.DORMANT

        tree = build_forwarding_tree(assignment, self.nodes, self.dmat, cfg.next_hop_policy)
        traffic = execute_round_traffic(tree, self.nodes, cfg.radio, self.to_sink, self.dmat)

        self.alive_count = sum(1 for n in self.nodes if n.role is not Role.DEAD)
        self.energy = self.total_energy()
        metrics = RoundMetrics(
            round=self.round,
            alive=self.alive_count,
            total_energy=self.energy,
            deaths_this_round=alive_before - self.alive_count,
            ch_count=len(heads),
            gateway_count=len(assignment.gateways),
            dormant_count=len(assignment.dormant),
        )
        return RoundDetail(metrics, assignment, tree, traffic, energy_before)

    def run(self) -> tuple[list[RoundMetrics], LifetimeSummary]:
        trace = []
        while not self.done():
            trace.append(self.step().metrics)
        return trace, summarize(trace, self.config.node_count)


def summarize(trace: list[RoundMetrics], node_count: int) -> LifetimeSummary:
    first = half = last = None
    dead = 0
    for m in trace:
        dead += m.deaths_this_round
        if first is None and dead >= 1:
            first = m.round
        if half is None and 2 * dead >= node_count:
            half = m.round
        if last is None and dead >= node_count:
            last = m.round
    return LifetimeSummary(first, half, last, len(trace))


def run(config: NetworkConfig) -> tuple[list[RoundMetrics], LifetimeSummary]:
    return Simulation(config).run()


def _run_seed(args: tuple[NetworkConfig, int, bool]):
    config, seed, keep = args
    trace, summary = run(config.with_(rng_seed=seed))
    return (trace if keep else None), summary


METRICS = ("first_node_death", "half_nodes_death", "last_node_death")


@dataclass
class EnsembleResult:
    config: NetworkConfig
    per_seed: dict[int, LifetimeSummary]
    median: dict[str, float] = field(default_factory=dict)
    mean: dict[str, float] = field(default_factory=dict)
    censored: dict[str, int] = field(default_factory=dict)
    traces: dict[int, list[RoundMetrics]] = field(default_factory=dict)


def run_ensemble(config: NetworkConfig, seeds, workers: int = 1, keep_traces: bool = False) -> EnsembleResult:
    """Run one independent simulation per seed and aggregate lifetimes.

    Deaths that did not happen within ``rounds_max`` enter the statistics as
    the number of rounds executed (a lower bound) and are counted in
    ``censored``.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("seeds must be non-empty")
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    config.validate()
    jobs = [(config, s, keep_traces) for s in seeds]
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_seed, jobs))
    else:
        outcomes = [_run_seed(j) for j in jobs]
    summaries = [s for _, s in outcomes]
    per_seed = dict(zip(seeds, summaries))

    result = EnsembleResult(config, per_seed)
    if keep_traces:
        result.traces = {seed: trace for seed, (trace, _) in zip(seeds, outcomes)}
    for name in METRICS:
        values = []
        censored = 0
        for s in summaries:
            v = getattr(s, name)
            if v is None:
                censored += 1
                v = s.rounds_executed
            values.append(v)
        result.median[name] = float(statistics.median(values))
        result.mean[name] = statistics.fmean(values)
        result.censored[name] = censored
    return result
