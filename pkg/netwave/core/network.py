"""Road network description: roads, junctions, distribution schedules."""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ValidationError
from .flux import FluxModel

logger = logging.getLogger(__name__)

COLUMN_SUM_TOLERANCE = 1e-12
MAX_JUNCTION_ROADS = 3


@dataclass(frozen=True)
class RoadSpec:
    """A road [a, b] with piecewise-constant initial density.

    ``initial`` lists (x, rho) pairs: the first x equals a, the remaining ones
    are strictly increasing breakpoints inside (a, b); rho holds to the right
    of its x.
    """

    id: str
    a: float
    b: float
    initial: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        """Validate road geometry and initial data."""
        if not self.id:
            raise ValidationError("Road ID cannot be empty")
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValidationError(f"Road {self.id} endpoints must be finite")
        if not self.a < self.b:
            raise ValidationError(f"Road {self.id} requires a < b, got [{self.a}, {self.b}]")
        if not self.initial:
            raise ValidationError(f"Road {self.id} needs at least one initial value")

        first_x = self.initial[0][0]
        if first_x != self.a:
            raise ValidationError(
                f"Road {self.id}: first initial breakpoint must equal a={self.a}, got {first_x}"
            )
        previous = self.a
        for x, rho in self.initial[1:]:
            if not (previous < x < self.b):
                raise ValidationError(
                    f"Road {self.id}: breakpoints must increase strictly inside (a, b), got {x}"
                )
            previous = x
        for _, rho in self.initial:
            if not (0.0 <= rho <= 1.0):
                raise ValidationError(f"Road {self.id}: density {rho} outside [0, 1]")

    @classmethod
    def constant(cls, road_id: str, a: float, b: float, rho: float) -> "RoadSpec":
        return cls(id=road_id, a=a, b=b, initial=((a, rho),))

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return tuple(x for x, _ in self.initial[1:])

    @property
    def values(self) -> Tuple[float, ...]:
        return tuple(rho for _, rho in self.initial)


@dataclass(frozen=True)
class DistributionMatrix:
    """Column-stochastic m x n matrix; entry [j][i] is the share of road i going to j."""

    entries: Tuple[Tuple[float, ...], ...]

    def __post_init__(self):
        """Validate shape, range and column sums."""
        if not self.entries or not self.entries[0]:
            raise ValidationError("Distribution matrix cannot be empty")
        width = len(self.entries[0])
        if any(len(row) != width for row in self.entries):
            raise ValidationError("Distribution matrix rows must have equal length")
        for row in self.entries:
            for value in row:
                if not (0.0 <= value <= 1.0):
                    raise ValidationError(f"Distribution entry {value} outside [0, 1]")
        sums = self.as_array().sum(axis=0)
        for i, total in enumerate(sums):
            if abs(total - 1.0) > COLUMN_SUM_TOLERANCE:
                raise ValidationError(f"Column {i} of distribution matrix sums to {total}, not 1")

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.entries), len(self.entries[0])

    def as_array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=float)

    def column(self, i: int) -> Tuple[float, ...]:
        return tuple(row[i] for row in self.entries)

    def effective(self, lights: Optional[Sequence[int]] = None) -> np.ndarray:
        """Entries alpha_ji * chi_i."""
        matrix = self.as_array()
        if lights is None:
            return matrix
        return matrix * np.asarray(lights, dtype=float)[np.newaxis, :]

    def distinctness_violations(self) -> List[Tuple[int, int, int]]:
        """(row, i, i') triples with alpha_ji == alpha_ji' for i < i'."""
        violations = []
        for j, row in enumerate(self.entries):
            for i in range(len(row)):
                for k in range(i + 1, len(row)):
                    if abs(row[i] - row[k]) <= COLUMN_SUM_TOLERANCE:
                        violations.append((j, i, k))
        return violations


@dataclass(frozen=True)
class ScheduleEntry:
    """Distribution matrix and lights active from time t on."""

    t: float
    matrix: DistributionMatrix
    lights: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.lights is not None and any(chi not in (0, 1) for chi in self.lights):
            raise ValidationError(f"Lights must be 0 or 1, got {self.lights}")

    def lights_or_green(self, n: int) -> Tuple[int, ...]:
        return self.lights if self.lights is not None else (1,) * n

    def effective_matrix(self) -> np.ndarray:
        return self.matrix.effective(self.lights)


@dataclass(frozen=True)
class JunctionSpec:
    """Junction with incoming/outgoing roads and a piecewise-constant schedule."""

    id: str
    incoming: Tuple[str, ...]
    outgoing: Tuple[str, ...]
    schedule: Tuple[ScheduleEntry, ...]
    period: Optional[float] = None

    def __post_init__(self):
        """Validate junction structure and schedule."""
        if not self.id:
            raise ValidationError("Junction ID cannot be empty")
        n, m = len(self.incoming), len(self.outgoing)
        if not (1 <= n <= MAX_JUNCTION_ROADS and 1 <= m <= MAX_JUNCTION_ROADS):
            raise ValidationError(
                f"Junction {self.id} must have 1-{MAX_JUNCTION_ROADS} incoming and outgoing "
                f"roads, got {n}x{m}"
            )
        if len(set(self.incoming)) != n or len(set(self.outgoing)) != m:
            raise ValidationError(f"Junction {self.id} lists a road twice")
        if not self.schedule:
            raise ValidationError(f"Junction {self.id} needs at least one schedule entry")
        if self.schedule[0].t != 0.0:
            raise ValidationError(f"Junction {self.id} schedule must start at t=0")

        times = [entry.t for entry in self.schedule]
        if any(later <= earlier for earlier, later in zip(times, times[1:])):
            raise ValidationError(f"Junction {self.id} schedule times must increase strictly")
        if self.period is not None and not (self.period > times[-1]):
            raise ValidationError(
                f"Junction {self.id} period {self.period} must exceed the last activation time"
            )

        with_lights = [entry.lights is not None for entry in self.schedule]
        for entry in self.schedule:
            if entry.matrix.shape != (m, n):
                raise ValidationError(
                    f"Junction {self.id}: matrix at t={entry.t} has shape "
                    f"{entry.matrix.shape}, expected {(m, n)}"
                )
            if entry.lights is not None and len(entry.lights) != n:
                raise ValidationError(f"Junction {self.id}: expected {n} lights at t={entry.t}")
        if n == 2 and any(with_lights):
            for entry in self.schedule:
                if sum(entry.lights_or_green(n)) != 1:
                    raise ValidationError(
                        f"Junction {self.id}: two-road lights must satisfy chi1 + chi2 = 1 "
                        f"at t={entry.t}"
                    )

    @property
    def n(self) -> int:
        return len(self.incoming)

    @property
    def m(self) -> int:
        return len(self.outgoing)

    @property
    def roads(self) -> Tuple[str, ...]:
        return self.incoming + self.outgoing

    @property
    def is_static(self) -> bool:
        return not _change_offsets(self)

    @classmethod
    def static(
        cls,
        junction_id: str,
        incoming: Sequence[str],
        outgoing: Sequence[str],
        matrix: Sequence[Sequence[float]],
    ) -> "JunctionSpec":
        entry = ScheduleEntry(0.0, DistributionMatrix(tuple(tuple(r) for r in matrix)))
        return cls(junction_id, tuple(incoming), tuple(outgoing), (entry,))


@dataclass
class NetworkSpec:
    """A validated network: roads, junctions, flux and tracking parameters."""

    roads: Tuple[RoadSpec, ...]
    junctions: Tuple[JunctionSpec, ...]
    flux: FluxModel = field(default_factory=FluxModel.smooth)
    delta: float = 0.02
    horizon: float = 10.0
    warnings: List[str] = field(default_factory=list)

    def __post_init__(self):
        """Validate references and collect warnings."""
        self.roads = tuple(self.roads)
        self.junctions = tuple(self.junctions)
        if not self.roads:
            raise ValidationError("Network must contain at least one road")
        if not (self.delta > 0.0):
            raise ValidationError(f"delta must be positive, got {self.delta}")
        if not (self.horizon > 0.0):
            raise ValidationError(f"horizon must be positive, got {self.horizon}")

        road_ids = [road.id for road in self.roads]
        if len(road_ids) != len(set(road_ids)):
            raise ValidationError("Network contains duplicate road IDs")
        junction_ids = [junction.id for junction in self.junctions]
        if len(junction_ids) != len(set(junction_ids)):
            raise ValidationError("Network contains duplicate junction IDs")

        self._road_index: Dict[str, int] = {rid: k for k, rid in enumerate(road_ids)}
        self._end_junction: Dict[str, Tuple[JunctionSpec, int]] = {}
        self._start_junction: Dict[str, Tuple[JunctionSpec, int]] = {}

        for junction in self.junctions:
            for road_id in junction.roads:
                if road_id not in self._road_index:
                    raise ValidationError(
                        f"Junction {junction.id} references unknown road {road_id}"
                    )
            for i, road_id in enumerate(junction.incoming):
                if road_id in self._end_junction:
                    raise ValidationError(f"Road {road_id} is incoming to more than one junction")
                self._end_junction[road_id] = (junction, i)
            for j, road_id in enumerate(junction.outgoing):
                if road_id in self._start_junction:
                    raise ValidationError(f"Road {road_id} is outgoing from more than one junction")
                self._start_junction[road_id] = (junction, j)

        self.warnings = list(self.warnings)
        for junction in self.junctions:
            for entry in junction.schedule:
                for row, i, k in entry.matrix.distinctness_violations():
                    message = (
                        f"Junction {junction.id} at t={entry.t}: row {row + 1} has equal "
                        f"entries for incoming roads {junction.incoming[i]} and "
                        f"{junction.incoming[k]}"
                    )
                    if message not in self.warnings:
                        self.warnings.append(message)
                        logger.warning(message)

    def road(self, road_id: str) -> RoadSpec:
        return self.roads[self.road_index(road_id)]

    def road_index(self, road_id: str) -> int:
        if road_id not in self._road_index:
            raise ValidationError(f"Unknown road {road_id}")
        return self._road_index[road_id]

    def junction(self, junction_id: str) -> JunctionSpec:
        for junction in self.junctions:
            if junction.id == junction_id:
                return junction
        raise ValidationError(f"Unknown junction {junction_id}")

    def junction_at_end(self, road_id: str) -> Optional[Tuple[JunctionSpec, int]]:
        """Junction the road flows into, with the road's incoming index."""
        return self._end_junction.get(road_id)

    def junction_at_start(self, road_id: str) -> Optional[Tuple[JunctionSpec, int]]:
        """Junction the road flows out of, with the road's outgoing index."""
        return self._start_junction.get(road_id)

    @property
    def is_closed(self) -> bool:
        """True when no road has a free end."""
        return all(
            road.id in self._end_junction and road.id in self._start_junction
            for road in self.roads
        )

    @property
    def total_length(self) -> float:
        return sum(road.length for road in self.roads)


def _entry_index(junction: JunctionSpec, t: float) -> int:
    local = t % junction.period if junction.period is not None else t
    index = 0
    for k, entry in enumerate(junction.schedule):
        if entry.t <= local:
            index = k
    return index


def matrix_at(junction: JunctionSpec, t: float) -> Tuple[DistributionMatrix, Tuple[int, ...]]:
    """Schedule entry active at t (right-continuous, periodic if a period is set)."""
    if t < 0.0:
        raise ValidationError(f"Schedules are defined for t >= 0, got {t}")
    entry = junction.schedule[_entry_index(junction, t)]
    return entry.matrix, entry.lights_or_green(junction.n)


def _entries_differ(first: ScheduleEntry, second: ScheduleEntry, n: int) -> int:
    """Count per-road jumps between two consecutive entries."""
    jumps = 0
    for i in range(n):
        if first.matrix.column(i) != second.matrix.column(i):
            jumps += 1
        if first.lights_or_green(n)[i] != second.lights_or_green(n)[i]:
            jumps += 1
    return jumps


def _change_offsets(junction: JunctionSpec) -> List[Tuple[float, int]]:
    """(offset within one period, number of jumps) for every effective change."""
    schedule = junction.schedule
    offsets = []
    for k in range(1, len(schedule)):
        jumps = _entries_differ(schedule[k - 1], schedule[k], junction.n)
        if jumps:
            offsets.append((schedule[k].t, jumps))
    if junction.period is not None and len(schedule) > 1:
        jumps = _entries_differ(schedule[-1], schedule[0], junction.n)
        if jumps:
            offsets.insert(0, (0.0, jumps))
    return offsets


def _jumps_between(junction: JunctionSpec, t1: float, t2: float) -> List[Tuple[float, int]]:
    offsets = _change_offsets(junction)
    if not offsets or t2 <= t1:
        return []
    if junction.period is None:
        return [(s, jumps) for s, jumps in offsets if t1 < s <= t2]

    period = junction.period
    instants = []
    first = max(int(math.floor(t1 / period)), 0)
    last = int(math.floor(t2 / period))
    for cycle in range(first, last + 1):
        for offset, jumps in offsets:
            s = cycle * period + offset
            if s > 0.0 and t1 < s <= t2:
                instants.append((s, jumps))
    return instants


def schedule_jump_times(junction: JunctionSpec, t1: float, t2: float) -> List[float]:
    """Instants in (t1, t2] where the effective schedule changes."""
    return [s for s, _ in _jumps_between(junction, t1, t2)]


def next_schedule_jump(junction: JunctionSpec, t: float) -> Optional[float]:
    """First schedule change strictly after t, or None."""
    offsets = _change_offsets(junction)
    if not offsets:
        return None
    if junction.period is None:
        later = [s for s, _ in offsets if s > t]
        return later[0] if later else None
    window = _jumps_between(junction, t, t + junction.period)
    return window[0][0] if window else None


def jump_count(junction: JunctionSpec, t1: float, t2: float) -> int:
    """Number of alpha and chi jumps in (t1, t2], counted per incoming road."""
    return sum(jumps for _, jumps in _jumps_between(junction, t1, t2))


def flux_tv_budget(spec: NetworkSpec, t1: float, t2: float) -> float:
    """A-priori bound 4 * fmax * (total jumps in (t1, t2]) on flux-variation growth."""
    total = sum(jump_count(junction, t1, t2) for junction in spec.junctions)
    return 4.0 * spec.flux.fmax * total
