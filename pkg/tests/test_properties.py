"""Per-round invariants over randomized small networks."""

from hypothesis import HealthCheck, given, settings

from invariants import check_run, small_configs


@settings(max_examples=1000, deadline=None, derandomize=True, suppress_health_check=list(HealthCheck))
@given(small_configs())
def test_round_invariants_hold_on_random_networks(config):
    check_run(config)
