"""Core data structures for netwave."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..exceptions import ValidationError


@dataclass(frozen=True)
class Wave:
    """A single discontinuity (rho_l, rho_r) travelling at a fixed speed."""

    rho_l: float
    rho_r: float
    speed: float

    def __post_init__(self):
        """Validate wave."""
        if self.rho_l == self.rho_r:
            raise ValidationError("A wave must separate two different densities")
        for value in (self.rho_l, self.rho_r):
            if not (0.0 <= value <= 1.0):
                raise ValidationError(f"Wave density {value} outside [0, 1]")

    @property
    def strength(self) -> float:
        """Absolute density jump across the wave."""
        return abs(self.rho_r - self.rho_l)

    @property
    def is_rarefaction(self) -> bool:
        """True for a rarefaction shock (density decreases left to right)."""
        return self.rho_l > self.rho_r


@dataclass(frozen=True)
class WaveFan:
    """Ordered waves emitted by one Riemann solve, slowest first."""

    waves: Tuple[Wave, ...] = ()

    def __post_init__(self):
        """Validate chaining and speed ordering."""
        for left, right in zip(self.waves, self.waves[1:]):
            if left.rho_r != right.rho_l:
                raise ValidationError(
                    f"Fan waves do not chain: {left.rho_r} != {right.rho_l}"
                )
            if right.speed < left.speed:
                raise ValidationError("Fan speeds must be non-decreasing")

    def __len__(self) -> int:
        return len(self.waves)

    def __iter__(self) -> Iterator[Wave]:
        return iter(self.waves)

    @property
    def is_empty(self) -> bool:
        return not self.waves

    @property
    def values(self) -> Tuple[float, ...]:
        """Breakpoint densities from the left state to the right state."""
        if not self.waves:
            return ()
        return (self.waves[0].rho_l,) + tuple(w.rho_r for w in self.waves)

    @property
    def speeds(self) -> Tuple[float, ...]:
        return tuple(w.speed for w in self.waves)


@dataclass(frozen=True)
class FeasibleRegion:
    """Polytope {gamma in prod [0, d_i] : A gamma <= s} of admissible incoming fluxes."""

    demands: np.ndarray
    supplies: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        """Validate dimensions and bounds."""
        m, n = self.matrix.shape
        if self.demands.shape != (n,):
            raise ValidationError(f"Expected {n} demands, got shape {self.demands.shape}")
        if self.supplies.shape != (m,):
            raise ValidationError(f"Expected {m} supplies, got shape {self.supplies.shape}")
        if np.any(self.demands < 0.0) or np.any(self.supplies < 0.0):
            raise ValidationError("Demands and supplies must be non-negative")

    @property
    def n(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def m(self) -> int:
        return int(self.matrix.shape[0])

    def contains(self, gamma: np.ndarray, tol: float = 1e-12) -> bool:
        """Check whether gamma lies in the region up to tol."""
        gamma = np.asarray(gamma, dtype=float)
        if np.any(gamma < -tol) or np.any(gamma > self.demands + tol):
            return False
        return bool(np.all(self.matrix @ gamma <= self.supplies + tol))


@dataclass(frozen=True)
class JunctionSolution:
    """Result of a junction Riemann solve."""

    incoming_fluxes: Tuple[float, ...]
    outgoing_fluxes: Tuple[float, ...]
    incoming_densities: Tuple[float, ...]
    outgoing_densities: Tuple[float, ...]
    incoming_fans: Tuple[WaveFan, ...]
    outgoing_fans: Tuple[WaveFan, ...]

    @property
    def densities(self) -> Tuple[float, ...]:
        """Junction states ordered incoming roads first, then outgoing roads."""
        return self.incoming_densities + self.outgoing_densities

    @property
    def balance_residual(self) -> float:
        """|sum of incoming fluxes - sum of outgoing fluxes|."""
        return abs(sum(self.incoming_fluxes) - sum(self.outgoing_fluxes))

    @property
    def is_trivial(self) -> bool:
        return all(f.is_empty for f in self.incoming_fans + self.outgoing_fans)


@dataclass(frozen=True)
class Front:
    """A discontinuity living on a road, moving ballistically from (x0, t0)."""

    uid: int
    road_id: str
    x0: float
    t0: float
    rho_l: float
    rho_r: float
    speed: float
    generation: int = 0

    def __post_init__(self):
        if self.rho_l == self.rho_r:
            raise ValidationError(f"Front {self.uid} on road {self.road_id} is a null jump")

    def position(self, t: float) -> float:
        """Position at time t."""
        return self.x0 + self.speed * (t - self.t0)


class EventKind(Enum):
    """Kinds of events; the rank orders simultaneous events."""

    SCHEDULE_JUMP = "schedule_jump"
    JUNCTION_ARRIVAL = "junction_arrival"
    BOUNDARY_EXIT = "boundary_exit"
    COLLISION = "collision"

    @property
    def rank(self) -> int:
        return _EVENT_RANKS[self]


_EVENT_RANKS = {
    EventKind.SCHEDULE_JUMP: 0,
    EventKind.JUNCTION_ARRIVAL: 1,
    EventKind.BOUNDARY_EXIT: 2,
    EventKind.COLLISION: 3,
}


@dataclass(frozen=True)
class Event:
    """A scheduled interaction."""

    time: float
    kind: EventKind
    road_id: Optional[str] = None
    junction_id: Optional[str] = None
    front_uids: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind is EventKind.SCHEDULE_JUMP and self.junction_id is None:
            raise ValidationError("Schedule jumps must name a junction")
        if self.kind is EventKind.COLLISION and len(self.front_uids) != 2:
            raise ValidationError("Collisions involve exactly two fronts")


@dataclass(frozen=True)
class RoadSnapshot:
    """Piecewise-constant density on one road at a fixed time.

    ``values[k]`` holds on ``[breakpoints[k-1], breakpoints[k]]`` with the road
    ends standing in for the missing breakpoints.
    """

    road_id: str
    a: float
    b: float
    breakpoints: Tuple[float, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        """Validate snapshot layout."""
        if len(self.values) != len(self.breakpoints) + 1:
            raise ValidationError(
                f"Road {self.road_id}: {len(self.values)} values for "
                f"{len(self.breakpoints)} breakpoints"
            )

    @property
    def left_trace(self) -> float:
        return self.values[0]

    @property
    def right_trace(self) -> float:
        return self.values[-1]

    def segments(self) -> List[Tuple[float, float, float]]:
        """(x_left, x_right, rho) triples covering [a, b]."""
        edges = (self.a,) + self.breakpoints + (self.b,)
        return [(edges[k], edges[k + 1], self.values[k]) for k in range(len(self.values))]

    def density_at(self, x: float) -> float:
        """Density just right of x (right-continuous)."""
        index = int(np.searchsorted(np.asarray(self.breakpoints), x, side="right"))
        return self.values[index]


@dataclass(frozen=True)
class Snapshot:
    """State of the whole network at one instant."""

    time: float
    roads: Dict[str, RoadSnapshot]

    def road(self, road_id: str) -> RoadSnapshot:
        if road_id not in self.roads:
            raise ValidationError(f"Snapshot has no road {road_id}")
        return self.roads[road_id]


@dataclass
class FunctionalSample:
    """Monitoring functionals evaluated on one snapshot."""

    time: float
    event_index: int
    tv_density: float
    tv_flux: float
    big_wave_count: int
    mass: float
    junction_bad_counts: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        """Validate sample."""
        for name in ("tv_density", "tv_flux", "mass"):
            if getattr(self, name) < 0.0:
                raise ValidationError(f"{name} must be non-negative")
        if self.big_wave_count < 0:
            raise ValidationError("Big wave count must be non-negative")


@dataclass
class EventRecord:
    """What happened at one processed event."""

    index: int
    time: float
    kind: EventKind
    road_id: Optional[str] = None
    junction_id: Optional[str] = None
    rho_before: Tuple[float, ...] = ()
    rho_after: Tuple[float, ...] = ()
    fronts_created: int = 0
    fronts_removed: int = 0
    balance_residual: float = 0.0


@dataclass
class RunResult:
    """Outcome of a run up to a horizon."""

    horizon: float
    event_count: int
    final: Snapshot
    events: List[EventRecord] = field(default_factory=list)
    samples: List[FunctionalSample] = field(default_factory=list)
    snapshots: Dict[float, Snapshot] = field(default_factory=dict)

    @property
    def final_sample(self) -> Optional[FunctionalSample]:
        return self.samples[-1] if self.samples else None
