"""Event-driven wave-front-tracking engine for road networks."""

import heapq
import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Deque, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import EngineConsistencyError, RunawayError, SnapshotRangeError
from .entities import (
    Event,
    EventKind,
    EventRecord,
    Front,
    RoadSnapshot,
    RunResult,
    Snapshot,
    WaveFan,
)
from .network import JunctionSpec, NetworkSpec, RoadSpec, matrix_at, next_schedule_jump
from .riemann import solve_junction_riemann, solve_road_riemann

logger = logging.getLogger(__name__)

DEFAULT_MAX_EVENTS = 10_000_000
DEFAULT_TIME_TOLERANCE = 1e-12
RECENT_EVENTS = 10

Observer = Callable[[Snapshot, Optional[EventRecord]], None]


@dataclass
class RoadState:
    """Density on one road: the value at its start plus ordered fronts."""

    road: RoadSpec
    index: int
    left_value: float
    fronts: List[Front] = field(default_factory=list)

    @property
    def right_value(self) -> float:
        return self.fronts[-1].rho_r if self.fronts else self.left_value


class TrackingEngine:
    """Exact front tracking: fronts move ballistically between events.

    Events are kept in a heap with lazy invalidation; an entry is stale once
    one of its fronts has been removed or the colliding pair stopped being
    adjacent.
    """

    def __init__(
        self,
        spec: NetworkSpec,
        max_events: int = DEFAULT_MAX_EVENTS,
        time_tolerance: float = DEFAULT_TIME_TOLERANCE,
        debug_checks: bool = False,
    ):
        self.spec = spec
        self.model = spec.flux
        self.delta = spec.delta
        self.max_events = max_events
        self.time_tolerance = time_tolerance
        self.debug_checks = debug_checks

        extent = max(max(abs(road.a), abs(road.b)) for road in spec.roads)
        self.position_tolerance = time_tolerance * max(1.0, self.model.c_hi) * max(1.0, extent)

        self.time = 0.0
        self.event_count = 0
        self.events: List[EventRecord] = []
        self._last_event_time = 0.0
        self._roads: Dict[str, RoadState] = {}
        self._alive: Dict[int, Front] = {}
        self._queue: List[Tuple[float, int, int, int, Event]] = []
        self._pending_jumps: Dict[str, Optional[float]] = {}
        self._uids = itertools.count()
        self._seq = itertools.count()
        self._recent: Deque[EventRecord] = deque(maxlen=RECENT_EVENTS)
        self._initialized = False

    # ------------------------------------------------------------------
    # construction

    def initialize(self) -> Snapshot:
        """Resolve every initial jump and every junction at t = 0."""
        for index, road in enumerate(self.spec.roads):
            state = RoadState(road=road, index=index, left_value=road.values[0])
            for x, (left, right) in zip(road.breakpoints, zip(road.values, road.values[1:])):
                fan = solve_road_riemann(left, right, self.model, self.delta)
                state.fronts.extend(self._make_fronts(road.id, fan, x, 0.0))
            self._roads[road.id] = state

        for junction in self.spec.junctions:
            self._solve_junction(junction, 0.0)

        for state in self._roads.values():
            for front in state.fronts:
                self._schedule_boundary(state, front)
            self._schedule_pairs(state, range(len(state.fronts) - 1))
        for junction in self.spec.junctions:
            self._schedule_jump(junction, 0.0)

        self._initialized = True
        logger.info(
            "Initialized tracking: %d roads, %d junctions, %d fronts",
            len(self.spec.roads),
            len(self.spec.junctions),
            self.front_count,
        )
        if self.debug_checks:
            self.check_consistency()
        return self.sample_state(0.0)

    # ------------------------------------------------------------------
    # queries

    @property
    def front_count(self) -> int:
        return len(self._alive)

    def fronts(self, road_id: str) -> Tuple[Front, ...]:
        return tuple(self._roads[road_id].fronts)

    def traces(self, junction: JunctionSpec) -> Tuple[float, ...]:
        """Current junction-adjacent values, incoming roads first."""
        incoming = tuple(self._roads[r].right_value for r in junction.incoming)
        outgoing = tuple(self._roads[r].left_value for r in junction.outgoing)
        return incoming + outgoing

    def next_event(self, until: Optional[float] = None) -> Optional[Event]:
        """Earliest pending event, or None if none occurs by ``until``."""
        entry = self._pop_next()
        if entry is None:
            return None
        heapq.heappush(self._queue, entry)
        event = entry[-1]
        if until is not None and event.time > until:
            return None
        return event

    def sample_state(self, t: float) -> Snapshot:
        """Exact piecewise-constant state at t inside the current inter-event interval."""
        upcoming = self.next_event()
        upper = upcoming.time if upcoming is not None else float("inf")
        if t < self._last_event_time - self.time_tolerance or t > upper + self.time_tolerance:
            raise SnapshotRangeError(
                f"Snapshot time {t} outside [{self._last_event_time}, {upper}]",
                t,
                (self._last_event_time, upper),
            )

        roads = {}
        for road_id, state in self._roads.items():
            road = state.road
            positions = np.array([front.position(t) for front in state.fronts], dtype=float)
            if positions.size:
                positions = np.maximum.accumulate(np.clip(positions, road.a, road.b))
            values = (state.left_value,) + tuple(front.rho_r for front in state.fronts)
            roads[road_id] = RoadSnapshot(
                road_id=road_id,
                a=road.a,
                b=road.b,
                breakpoints=tuple(float(x) for x in positions),
                values=values,
            )
        return Snapshot(time=t, roads=roads)

    # ------------------------------------------------------------------
    # stepping

    def advance(self) -> Optional[EventRecord]:
        """Process the next event; returns None when the queue is exhausted."""
        if not self._initialized:
            self.initialize()
        entry = self._pop_next()
        if entry is None:
            return None
        event = entry[-1]

        if self.event_count >= self.max_events:
            raise RunawayError(
                f"Event limit of {self.max_events} reached at t={self.time}",
                list(self._recent),
            )

        self.time = max(self.time, event.time)
        self._last_event_time = self.time
        self.event_count += 1

        if event.kind is EventKind.COLLISION:
            record = self._handle_collision(event)
        elif event.kind is EventKind.BOUNDARY_EXIT:
            record = self._handle_exit(event)
        else:
            junction = self.spec.junction(event.junction_id)
            if event.kind is EventKind.SCHEDULE_JUMP:
                self._schedule_jump(junction, self.time)
            record = self._junction_event(junction, event)

        self.events.append(record)
        self._recent.append(record)
        logger.debug(
            "Event %d at t=%.12g: %s road=%s junction=%s",
            record.index,
            record.time,
            record.kind.value,
            record.road_id,
            record.junction_id,
        )
        if self.debug_checks:
            self.check_consistency(event)
        return record

    def run_until(self, horizon: float, observers: Sequence[Observer] = ()) -> RunResult:
        """Advance through every event up to ``horizon``, notifying observers.

        Observers receive the post-event snapshot and the event record, and a
        final call with the snapshot at ``horizon`` and no record.
        """
        if not self._initialized:
            self.initialize()
        if horizon < self.time:
            raise SnapshotRangeError(
                f"Horizon {horizon} precedes current time {self.time}", horizon, (self.time,)
            )

        start_count = self.event_count
        while self.next_event(until=horizon) is not None:
            record = self.advance()
            if observers:
                snapshot = self.sample_state(self.time)
                for observer in observers:
                    observer(snapshot, record)

        self.time = horizon
        final = self.sample_state(horizon)
        for observer in observers:
            observer(final, None)
        logger.info(
            "Reached t=%g after %d events (%d fronts alive)",
            horizon,
            self.event_count - start_count,
            self.front_count,
        )
        return RunResult(
            horizon=horizon,
            event_count=self.event_count,
            final=final,
            events=list(self.events),
        )

    def check_consistency(self, event: Optional[Event] = None) -> None:
        """Verify ordering, chaining and Rankine-Hugoniot speeds of all fronts."""
        slack = self.position_tolerance * 10.0
        for road_id, state in self._roads.items():
            road = state.road
            previous_value = state.left_value
            previous_position = road.a - slack
            for front in state.fronts:
                position = front.position(self.time)
                context = {"road": road_id, "front": front, "time": self.time}
                if front.rho_l != previous_value:
                    raise EngineConsistencyError(
                        f"Broken chaining on road {road_id}", event=event, context=context
                    )
                if position < previous_position - slack or not (
                    road.a - slack <= position <= road.b + slack
                ):
                    raise EngineConsistencyError(
                        f"Front out of order on road {road_id}", event=event, context=context
                    )
                expected = self.model.rh_speed(front.rho_l, front.rho_r)
                if abs(expected - front.speed) > 1e-12 * max(1.0, abs(expected)):
                    raise EngineConsistencyError(
                        f"Front speed differs from Rankine-Hugoniot on road {road_id}",
                        event=event,
                        context=context,
                    )
                if front.uid not in self._alive:
                    raise EngineConsistencyError(
                        f"Dead front listed on road {road_id}", event=event, context=context
                    )
                previous_value = front.rho_r
                previous_position = position

    # ------------------------------------------------------------------
    # event handlers

    def _handle_collision(self, event: Event) -> EventRecord:
        state = self._roads[event.road_id]
        fronts = state.fronts
        left_index = self._index_of(state, event.front_uids[0])
        right_index = left_index + 1
        t = self.time
        x = 0.5 * (fronts[left_index].position(t) + fronts[right_index].position(t))
        x = min(max(x, state.road.a), state.road.b)

        while left_index > 0 and fronts[left_index - 1].position(t) >= x - self.position_tolerance:
            left_index -= 1
        while (
            right_index < len(fronts) - 1
            and fronts[right_index + 1].position(t) <= x + self.position_tolerance
        ):
            right_index += 1

        rho_l = fronts[left_index].rho_l
        rho_r = fronts[right_index].rho_r
        fan = solve_road_riemann(rho_l, rho_r, self.model, self.delta)
        created = self._make_fronts(state.road.id, fan, x, t)
        removed = fronts[left_index : right_index + 1]
        for front in removed:
            self._kill(front)
        fronts[left_index : right_index + 1] = created

        for front in created:
            self._schedule_boundary(state, front)
        self._schedule_pairs(state, [left_index - 1, left_index + len(created) - 1])

        return EventRecord(
            index=self.event_count,
            time=t,
            kind=event.kind,
            road_id=state.road.id,
            rho_before=(rho_l, rho_r),
            rho_after=fan.values,
            fronts_created=len(created),
            fronts_removed=len(removed),
        )

    def _handle_exit(self, event: Event) -> EventRecord:
        state = self._roads[event.road_id]
        road = state.road
        t = self.time
        front = self._alive[event.front_uids[0]]
        removed: List[Front] = []

        # Only fronts moving out of the road leave; inward ones born at the end stay.
        if front.speed > 0.0:
            while (
                state.fronts
                and state.fronts[-1].speed > 0.0
                and state.fronts[-1].position(t) >= road.b - self.position_tolerance
            ):
                removed.append(state.fronts.pop())
            after = (state.right_value,)
        else:
            while (
                state.fronts
                and state.fronts[0].speed < 0.0
                and state.fronts[0].position(t) <= road.a + self.position_tolerance
            ):
                removed.append(state.fronts.pop(0))
            if removed:
                state.left_value = removed[-1].rho_r
            after = (state.left_value,)
        for gone in removed:
            self._kill(gone)

        return EventRecord(
            index=self.event_count,
            time=t,
            kind=event.kind,
            road_id=road.id,
            rho_before=(front.rho_l, front.rho_r),
            rho_after=after,
            fronts_removed=len(removed),
        )

    def _junction_event(self, junction: JunctionSpec, event: Event) -> EventRecord:
        created, removed, before, solution = self._solve_junction(junction, self.time)
        for road_id in junction.roads:
            state = self._roads[road_id]
            for front in state.fronts:
                if front.uid in created:
                    self._schedule_boundary(state, front)
        for road_id in junction.incoming:
            state = self._roads[road_id]
            first_new = next(
                (k for k, f in enumerate(state.fronts) if f.uid in created), len(state.fronts)
            )
            self._schedule_pairs(state, [first_new - 1])
        for road_id in junction.outgoing:
            state = self._roads[road_id]
            last_new = max(
                (k for k, f in enumerate(state.fronts) if f.uid in created), default=-1
            )
            self._schedule_pairs(state, [last_new])

        return EventRecord(
            index=self.event_count,
            time=self.time,
            kind=event.kind,
            road_id=event.road_id,
            junction_id=junction.id,
            rho_before=before,
            rho_after=solution.densities,
            fronts_created=len(created),
            fronts_removed=removed,
            balance_residual=solution.balance_residual,
        )

    def _solve_junction(self, junction: JunctionSpec, t: float):
        """Absorb fronts sitting at the junction, solve, and emit the new fans."""
        removed = 0
        for road_id in junction.incoming:
            state = self._roads[road_id]
            b = state.road.b
            while state.fronts and state.fronts[-1].position(t) >= b - self.position_tolerance:
                self._kill(state.fronts.pop())
                removed += 1
        for road_id in junction.outgoing:
            state = self._roads[road_id]
            a = state.road.a
            while state.fronts and state.fronts[0].position(t) <= a + self.position_tolerance:
                front = state.fronts.pop(0)
                state.left_value = front.rho_r
                self._kill(front)
                removed += 1

        before = self.traces(junction)
        matrix, lights = matrix_at(junction, t)
        solution = solve_junction_riemann(
            before[: junction.n],
            before[junction.n :],
            matrix.effective(lights),
            self.model,
            self.delta,
            lights,
        )

        created = set()
        for road_id, fan in zip(junction.incoming, solution.incoming_fans):
            state = self._roads[road_id]
            new = self._make_fronts(road_id, fan, state.road.b, t)
            state.fronts.extend(new)
            created.update(f.uid for f in new)
        for road_id, fan, rho_hat in zip(
            junction.outgoing, solution.outgoing_fans, solution.outgoing_densities
        ):
            state = self._roads[road_id]
            new = self._make_fronts(road_id, fan, state.road.a, t)
            state.fronts[0:0] = new
            if new:
                state.left_value = rho_hat
            created.update(f.uid for f in new)
        return created, removed, before, solution

    # ------------------------------------------------------------------
    # bookkeeping

    def _make_fronts(self, road_id: str, fan: WaveFan, x: float, t: float) -> List[Front]:
        fronts = []
        for wave in fan:
            front = Front(
                uid=next(self._uids),
                road_id=road_id,
                x0=x,
                t0=t,
                rho_l=wave.rho_l,
                rho_r=wave.rho_r,
                speed=wave.speed,
                generation=self.event_count,
            )
            self._alive[front.uid] = front
            fronts.append(front)
        return fronts

    def _kill(self, front: Front) -> None:
        self._alive.pop(front.uid, None)

    def _index_of(self, state: RoadState, uid: int) -> int:
        for k, front in enumerate(state.fronts):
            if front.uid == uid:
                return k
        raise EngineConsistencyError(
            f"Front {uid} missing from road {state.road.id}", context={"time": self.time}
        )

    def _push(self, event: Event, road_index: int) -> None:
        heapq.heappush(
            self._queue, (event.time, event.kind.rank, road_index, next(self._seq), event)
        )

    def _schedule_boundary(self, state: RoadState, front: Front) -> None:
        road = state.road
        if front.speed > 0.0:
            target = road.b
            attached = self.spec.junction_at_end(road.id)
        elif front.speed < 0.0:
            target = road.a
            attached = self.spec.junction_at_start(road.id)
        else:
            return
        t = max(front.t0 + (target - front.x0) / front.speed, self.time)
        if attached is None:
            event = Event(t, EventKind.BOUNDARY_EXIT, road_id=road.id, front_uids=(front.uid,))
        else:
            event = Event(
                t,
                EventKind.JUNCTION_ARRIVAL,
                road_id=road.id,
                junction_id=attached[0].id,
                front_uids=(front.uid,),
            )
        self._push(event, state.index)

    def _schedule_pairs(self, state: RoadState, left_indices) -> None:
        fronts = state.fronts
        for k in left_indices:
            if k < 0 or k + 1 >= len(fronts):
                continue
            left, right = fronts[k], fronts[k + 1]
            closing = left.speed - right.speed
            if closing <= 0.0:
                continue
            gap = (right.x0 - right.speed * right.t0) - (left.x0 - left.speed * left.t0)
            t = max(gap / closing, self.time)
            event = Event(
                t, EventKind.COLLISION, road_id=state.road.id, front_uids=(left.uid, right.uid)
            )
            self._push(event, state.index)

    def _schedule_jump(self, junction: JunctionSpec, t: float) -> None:
        upcoming = next_schedule_jump(junction, t)
        self._pending_jumps[junction.id] = upcoming
        if upcoming is None:
            return
        road_index = min(self.spec.road_index(r) for r in junction.roads)
        self._push(
            Event(upcoming, EventKind.SCHEDULE_JUMP, junction_id=junction.id), road_index
        )

    def _is_live(self, event: Event) -> bool:
        if event.kind is EventKind.SCHEDULE_JUMP:
            return self._pending_jumps.get(event.junction_id) == event.time
        if any(uid not in self._alive for uid in event.front_uids):
            return False
        if event.kind is EventKind.COLLISION:
            state = self._roads[event.road_id]
            k = self._index_of(state, event.front_uids[0])
            return k + 1 < len(state.fronts) and state.fronts[k + 1].uid == event.front_uids[1]
        return True

    def _pop_next(self):
        """Remove and return the next live entry, honouring the simultaneity order."""
        while self._queue and not self._is_live(self._queue[0][-1]):
            heapq.heappop(self._queue)
        if not self._queue:
            return None

        cutoff = self._queue[0][0] + self.time_tolerance
        batch = []
        while self._queue and self._queue[0][0] <= cutoff:
            entry = heapq.heappop(self._queue)
            if self._is_live(entry[-1]):
                batch.append(entry)
        best = min(batch, key=lambda entry: (entry[1], entry[2], entry[3]))
        for entry in batch:
            if entry is not best:
                heapq.heappush(self._queue, entry)
        return best
