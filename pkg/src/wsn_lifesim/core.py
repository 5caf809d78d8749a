"""Shared domain types, network configuration and node deployment.

Randomness: every run owns one ``numpy.random.Generator`` backed by PCG64 and
seeded with the run's 64-bit seed (see :func:`make_rng`).  Draw order is fixed:

1. deployment: ``node_count`` x-coordinates, then ``node_count`` y-coordinates;
2. each round, one uniform draw per alive lottery candidate in ascending node
   id (per layer, nearest layer first, for the layered protocols).

Nothing else consumes the generator, so a (config, seed) pair fully
determines a run.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

SINK = -1  # parent id used for "transmit to the sink"


class Role(enum.Enum):
    MEMBER = "member"
    CLUSTER_HEAD = "cluster_head"
    GATEWAY = "gateway"
    DORMANT = "dormant"
    DEAD = "dead"


class SinkMode(enum.Enum):
    STATIC = "static"
    MOBILE = "mobile"


class Protocol(enum.Enum):
    LEACH = "leach"
    ELEACH = "eleach"
    PROPOSE1 = "propose1"
    PROPOSE2 = "propose2"

    @property
    def layered(self) -> bool:
        return self in (Protocol.PROPOSE1, Protocol.PROPOSE2)


@dataclass(frozen=True)
class Position:
    x: float
    y: float


def distance(a: Position, b: Position) -> float:
    """Euclidean distance in meters."""
    return math.hypot(a.x - b.x, a.y - b.y)


@dataclass(frozen=True)
class RadioParams:
    """First-order radio model constants (energies in joules per bit).

    ``e_amp`` multiplies ``d ** gamma``; below ``d_threshold`` the exponent is
    ``gamma_near``, at or above it ``gamma_far``.  With both exponents equal
    (the default) the threshold is inert.
    """

    e_elec: float = 50e-9
    e_amp: float = 0.659e-9
    e_cpu: float = 7e-9
    packet_bits: int = 4000
    gamma_near: float = 2.0
    gamma_far: float = 2.0
    d_threshold: float = 87.0

    def validate(self) -> None:
        for name in ("e_elec", "e_amp", "e_cpu"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"radio.{name} must be a positive finite energy, got {value!r}")
        if self.packet_bits <= 0:
            raise ValueError(f"radio.packet_bits must be positive, got {self.packet_bits!r}")
        if self.gamma_near > self.gamma_far:
            raise ValueError("radio.gamma_near must not exceed radio.gamma_far")
        if not self.d_threshold > 0:
            raise ValueError(f"radio.d_threshold must be positive, got {self.d_threshold!r}")


@dataclass(slots=True)
class NodeState:
    id: int
    pos: Position
    energy: float
    initial_energy: float
    layer: int | None = None
    role: Role = Role.MEMBER

    @property
    def alive(self) -> bool:
        return self.role is not Role.DEAD


@dataclass
class NetworkConfig:
    field_width: float = 200.0
    field_height: float = 200.0
    node_count: int = 100
    initial_energy: float = 0.5
    radio: RadioParams = field(default_factory=RadioParams)
    sink_mode: SinkMode = SinkMode.STATIC
    # None places the sink half a field height beyond the top edge, centred;
    # for the default 200 x 200 field that is (100, 300).
    sink_initial: Position | None = None
    sink_speed: float = 10.0
    protocol: Protocol = Protocol.LEACH
    rounds_max: int = 10_000
    rng_seed: int = 0
    p: float = 0.05
    layer_fraction: float = 0.15
    next_hop_policy: str = "score"
    orbit_center: Position | None = None
    orbit_radius: float | None = None

    @property
    def sink_position(self) -> Position:
        if self.sink_initial is not None:
            return self.sink_initial
        return Position(self.field_width / 2, 1.5 * self.field_height)

    def validate(self) -> "NetworkConfig":
        """Raise ``ValueError`` naming the first offending field."""
        if not (math.isfinite(self.field_width) and self.field_width > 0):
            raise ValueError(f"field_width must be > 0, got {self.field_width!r}")
        if not (math.isfinite(self.field_height) and self.field_height > 0):
            raise ValueError(f"field_height must be > 0, got {self.field_height!r}")
        if not isinstance(self.node_count, int) or self.node_count < 1:
            raise ValueError(f"node_count must be an integer >= 1, got {self.node_count!r}")
        if not (math.isfinite(self.initial_energy) and self.initial_energy > 0):
            raise ValueError(f"initial_energy must be > 0, got {self.initial_energy!r}")
        self.radio.validate()
        if not isinstance(self.rounds_max, int) or self.rounds_max < 1:
            raise ValueError(f"rounds_max must be an integer >= 1, got {self.rounds_max!r}")
        if not isinstance(self.rng_seed, int) or not 0 <= self.rng_seed < 2**64:
            raise ValueError(f"rng_seed must be an unsigned 64-bit integer, got {self.rng_seed!r}")
        if not 0 < self.p < 1:
            raise ValueError(f"p must lie in (0, 1), got {self.p!r}")
        if not 0 < self.layer_fraction < 1:
            raise ValueError(f"layer_fraction must lie in (0, 1), got {self.layer_fraction!r}")
        if self.sink_mode is SinkMode.MOBILE and not (
            math.isfinite(self.sink_speed) and self.sink_speed >= 0
        ):
            raise ValueError(f"sink_speed must be >= 0, got {self.sink_speed!r}")
        if self.next_hop_policy not in ("score", "energy"):
            raise ValueError(f"next_hop_policy must be 'score' or 'energy', got {self.next_hop_policy!r}")
        if self.orbit_radius is not None and not self.orbit_radius > 0:
            raise ValueError(f"orbit_radius must be > 0, got {self.orbit_radius!r}")
        sink = self.sink_position
        if not (math.isfinite(sink.x) and math.isfinite(sink.y)):
            raise ValueError("sink_initial must be finite")
        return self

    def with_(self, **changes) -> "NetworkConfig":
        return replace(self, **changes)


@dataclass
class ClusterAssignment:
    """One round's role map.

    ``heads`` is keyed by layer index; the baselines use the single key 0 for
    their network-wide clusters.  ``members`` maps a node to the CH or gateway
    it reports to.  ``direct`` lists nodes that transmit straight to the sink
    without a cluster (baseline rounds in which no CH was elected).
    """

    heads: dict[int, list[int]] = field(default_factory=dict)
    members: dict[int, int] = field(default_factory=dict)
    gateways: list[int] = field(default_factory=list)
    dormant: list[int] = field(default_factory=list)
    direct: list[int] = field(default_factory=list)

    def all_heads(self) -> list[int]:
        return [h for layer in sorted(self.heads) for h in self.heads[layer]]


@dataclass(frozen=True)
class RoundMetrics:
    round: int
    alive: int
    total_energy: float
    deaths_this_round: int
    ch_count: int
    gateway_count: int
    dormant_count: int


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def deploy_network(config: NetworkConfig, rng: np.random.Generator) -> list[NodeState]:
    """Scatter ``node_count`` nodes uniformly over the field rectangle."""
    n = config.node_count
    xs = rng.uniform(0.0, config.field_width, n)
    ys = rng.uniform(0.0, config.field_height, n)
    return [
        NodeState(
            id=i,
            pos=Position(float(xs[i]), float(ys[i])),
            energy=config.initial_energy,
            initial_energy=config.initial_energy,
        )
        for i in range(n)
    ]


def distance_matrix(nodes: list[NodeState]) -> np.ndarray:
    """Pairwise node distances, indexed by node id."""
    xy = np.array([(n.pos.x, n.pos.y) for n in nodes], dtype=float).reshape(-1, 2)
    diff = xy[:, None, :] - xy[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])
