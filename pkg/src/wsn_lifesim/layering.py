"""Distance-band layering of the field around the sink.

Layers are concentric bands centred on the sink.  Band 1 starts at the
sink-side edge of the field (the field point nearest the sink) and the last
band ends at the far corner, so the layered span is ``far - near``.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass

from .core import NodeState, Position, distance


@dataclass(frozen=True)
class Layering:
    widths: tuple[float, ...]
    origin: float = 0.0  # sink distance at which layer 1 begins

    @property
    def edges(self) -> tuple[float, ...]:
        """Outer band edges relative to ``origin``."""
        return tuple(itertools.accumulate(self.widths))

    @property
    def count(self) -> int:
        return len(self.widths)

    def layer_of(self, d: float) -> int:
        """1-based layer for a sink distance ``d``; band edges go to the nearer layer."""
        i = bisect.bisect_left(self.edges, d - self.origin)
        return min(i, len(self.widths) - 1) + 1


def compute_layers(y: float, fraction: float = 0.15, origin: float = 0.0) -> Layering:
    """Split a span of ``y`` meters into growing bands.

    The first band is ``fraction * y``.  With ``m`` the span still
    unallocated, each next band is ``previous + fraction * m`` as long as that
    fits inside ``m``; otherwise the remainder is folded into the last band.
    """
    if not y > 0:
        raise ValueError(f"span must be positive, got {y!r}")
    widths = [fraction * y]
    m = y - widths[0]
    while True:
        candidate = widths[-1] + fraction * m
        if m >= candidate:
            widths.append(candidate)
            m -= candidate
        else:
            widths[-1] += m
            break
    # pin the closure exactly: the last band absorbs accumulated rounding
    widths[-1] = y - math.fsum(widths[:-1])
    for _ in range(4):  # a tie in the sum can make exact closure unreachable
        total = math.fsum(widths)
        if total == y:
            break
        widths[-1] = math.nextafter(widths[-1], -math.inf if total > y else math.inf)
    return Layering(tuple(widths), origin)


def field_span(sink: Position, width: float, height: float) -> tuple[float, float]:
    """(nearest, farthest) distance from ``sink`` to the field rectangle."""
    nx = min(max(sink.x, 0.0), width)
    ny = min(max(sink.y, 0.0), height)
    near = distance(sink, Position(nx, ny))
    far = max(
        distance(sink, Position(cx, cy)) for cx in (0.0, width) for cy in (0.0, height)
    )
    return near, far


def layering_for_sink(sink: Position, width: float, height: float, fraction: float = 0.15) -> Layering:
    near, far = field_span(sink, width, height)
    return compute_layers(far - near, fraction, origin=near)


def assign_layers(nodes: list[NodeState], layering: Layering, sink: Position) -> None:
    """Set ``layer`` on every alive node in place."""
    for node in nodes:
        if node.alive:
            node.layer = layering.layer_of(distance(node.pos, sink))


def relayer_on_sink_move(
    nodes: list[NodeState],
    sink: Position,
    width: float,
    height: float,
    fraction: float = 0.15,
) -> Layering:
    """Rebuild the bands for a new sink position and re-assign node layers."""
    layering = layering_for_sink(sink, width, height, fraction)
    assign_layers(nodes, layering, sink)
    return layering
