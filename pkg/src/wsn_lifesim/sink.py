"""Sink position state: fixed, or jumping along a circular orbit around the field."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .core import NetworkConfig, Position, SinkMode, distance

ORBIT_MARGIN = 0.1  # fraction of the half-diagonal kept clear when the sink starts inside


def arc_step(t: float, r: float) -> float:
    """Arc length in meters swept by ``t`` degrees on a circle of radius ``r``."""
    return t * (math.pi / 180) * r


def degrees_per_round(speed: float, r: float) -> float:
    """Inverse of :func:`arc_step`: angular step giving ``speed`` meters of arc."""
    return speed * 180 / (math.pi * r)


@dataclass(frozen=True)
class SinkState:
    pos: Position
    mode: SinkMode
    orbit_center: Position
    orbit_radius: float
    angle: float  # degrees
    step_degrees: float


def _on_orbit(center: Position, radius: float, angle: float) -> Position:
    a = math.radians(angle)
    return Position(center.x + radius * math.cos(a), center.y + radius * math.sin(a))


def initial_sink(config: NetworkConfig) -> SinkState:
    """Build the round-1 sink.

    The orbit is centred on the field centre.  Its radius defaults to the
    distance to the configured sink position when that lies outside the
    field's circumscribed circle (so the sink starts where configured),
    otherwise to the half-diagonal plus a margin.
    """
    start = config.sink_position
    w, h = config.field_width, config.field_height
    center = config.orbit_center or Position(w / 2, h / 2)
    half_diag = math.hypot(w, h) / 2
    offset = distance(center, start)
    angle = math.degrees(math.atan2(start.y - center.y, start.x - center.x)) if offset > 0 else 90.0
    if config.orbit_radius is not None:
        radius = config.orbit_radius
    elif offset > half_diag:
        radius = offset
    else:
        radius = half_diag * (1 + ORBIT_MARGIN)
    step = degrees_per_round(config.sink_speed, radius)
    if config.sink_mode is SinkMode.STATIC:
        return SinkState(start, SinkMode.STATIC, center, radius, angle, 0.0)
    pos = start if math.isclose(offset, radius) else _on_orbit(center, radius, angle)
    return SinkState(pos, SinkMode.MOBILE, center, radius, angle, step)


def advance_sink(sink: SinkState, steps: int = 1) -> SinkState:
    """Jump ``steps`` angular steps along the orbit; static sinks never move."""
    if sink.mode is SinkMode.STATIC or steps == 0:
        return sink
    angle = (sink.angle + steps * sink.step_degrees) % 360.0
    return replace(sink, angle=angle, pos=_on_orbit(sink.orbit_center, sink.orbit_radius, angle))
