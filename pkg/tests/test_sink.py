import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wsn_lifesim.core import NetworkConfig, Position, SinkMode, distance
from wsn_lifesim.sink import advance_sink, arc_step, degrees_per_round, initial_sink


def test_arc_step_oracle():
    assert arc_step(10, 100) == pytest.approx(17.4533, abs=1e-3)


@given(st.floats(0.01, 500), st.floats(1, 1000))
def test_degrees_per_round_inverts_arc_step(speed, r):
    assert math.isclose(arc_step(degrees_per_round(speed, r), r), speed, rel_tol=1e-12)


def test_static_sink_never_moves():
    sink = initial_sink(NetworkConfig())
    assert sink.pos == Position(100, 300)
    assert advance_sink(sink, 50) is sink


def test_mobile_sink_starts_at_configured_exterior_point():
    sink = initial_sink(NetworkConfig(sink_mode=SinkMode.MOBILE))
    assert sink.orbit_center == Position(100, 100)
    assert sink.orbit_radius == 200
    assert sink.pos == Position(100, 300)


def test_mobile_sink_moves_speed_meters_of_arc_per_round():
    cfg = NetworkConfig(sink_mode=SinkMode.MOBILE, sink_speed=10.0)
    sink = initial_sink(cfg)
    nxt = advance_sink(sink)
    assert math.isclose(arc_step(nxt.step_degrees, nxt.orbit_radius), 10.0)
    assert math.isclose(distance(nxt.pos, sink.orbit_center), sink.orbit_radius)
    chord = distance(sink.pos, nxt.pos)
    assert chord < 10.0 and math.isclose(chord, 10.0, rel_tol=1e-3)


def test_interior_start_is_pushed_outside_the_field():
    cfg = NetworkConfig(sink_mode=SinkMode.MOBILE, sink_initial=Position(100, 120))
    sink = initial_sink(cfg)
    assert sink.orbit_radius > math.hypot(200, 200) / 2


@given(st.integers(0, 2000))
def test_orbit_is_periodic_and_stays_on_circle(steps):
    sink = initial_sink(NetworkConfig(sink_mode=SinkMode.MOBILE, sink_speed=37.0))
    moved = advance_sink(sink, steps)
    assert math.isclose(distance(moved.pos, sink.orbit_center), sink.orbit_radius, rel_tol=1e-9)
    assert 0 <= moved.angle < 360
