"""netwave - exact wave-front tracking for traffic flow on road networks."""

__version__ = "0.1.0"
__author__ = "netwave developers"

from .core.entities import EventKind, EventRecord, FunctionalSample, RunResult, Snapshot
from .core.flux import FluxModel, build_kinked_approximation
from .core.network import DistributionMatrix, JunctionSpec, NetworkSpec, RoadSpec, ScheduleEntry
from .core.tracking import TrackingEngine
from .parsers.network_config import load_network, parse_network, serialize_network

__all__ = [
    "EventKind",
    "EventRecord",
    "FunctionalSample",
    "RunResult",
    "Snapshot",
    "FluxModel",
    "build_kinked_approximation",
    "DistributionMatrix",
    "JunctionSpec",
    "NetworkSpec",
    "RoadSpec",
    "ScheduleEntry",
    "TrackingEngine",
    "load_network",
    "parse_network",
    "serialize_network",
]
