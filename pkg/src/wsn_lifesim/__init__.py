"""Round-based lifetime simulator for clustered wireless sensor networks."""

from .core import (
    SINK,
    ClusterAssignment,
    NetworkConfig,
    NodeState,
    Position,
    Protocol,
    RadioParams,
    Role,
    RoundMetrics,
    SinkMode,
)
from .engine import EnsembleResult, LifetimeSummary, Simulation, run, run_ensemble

__all__ = [
    "SINK",
    "ClusterAssignment",
    "EnsembleResult",
    "LifetimeSummary",
    "NetworkConfig",
    "NodeState",
    "Position",
    "Protocol",
    "RadioParams",
    "Role",
    "RoundMetrics",
    "Simulation",
    "SinkMode",
    "run",
    "run_ensemble",
]
