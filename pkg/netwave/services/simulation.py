"""Simulation Service orchestrating runs, validation and parameter sweeps."""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from ..core.entities import RunResult, Snapshot
from ..core.functionals import TelemetryRecorder
from ..core.network import NetworkSpec, RoadSpec
from ..core.tracking import Observer, TrackingEngine
from ..exceptions import ScenarioError
from ..infrastructure.settings import Settings
from ..parsers.network_config import load_network
from .scenarios import ScenarioId, ScenarioParameters, build_scenario

logger = logging.getLogger(__name__)

BREAKPOINT_JITTER = 0.25


@dataclass(frozen=True)
class SweepCase:
    """One independent run of a sweep."""

    run: int
    label: str
    spec: NetworkSpec
    max_events: int
    time_tolerance: float


@dataclass(frozen=True)
class SweepRow:
    """Summary of one sweep run."""

    run: int
    label: str
    events: int
    tv_flux: float
    big_wave_count: int
    mass: float


def run_case(case: SweepCase) -> SweepRow:
    """Run one sweep case to its horizon (module level so worker processes can import it)."""
    engine = TrackingEngine(case.spec, case.max_events, case.time_tolerance)
    recorder = TelemetryRecorder(case.spec)
    recorder.record_initial(engine.initialize())
    result = engine.run_until(case.spec.horizon, [recorder])
    final = recorder.samples[-1]
    return SweepRow(
        run=case.run,
        label=case.label,
        events=result.event_count,
        tv_flux=final.tv_flux,
        big_wave_count=final.big_wave_count,
        mass=final.mass,
    )


def jitter_breakpoints(spec: NetworkSpec, seed: int, scale: float = BREAKPOINT_JITTER) -> NetworkSpec:
    """Copy of spec with every initial breakpoint shifted within its neighbours' gap."""
    rng = np.random.default_rng(seed)
    roads = []
    for road in spec.roads:
        xs = [x for x, _ in road.initial]
        edges = xs + [road.b]
        moved = [xs[0]]
        for k in range(1, len(xs)):
            left_gap = xs[k] - moved[k - 1]
            right_gap = edges[k + 1] - xs[k]
            shift = rng.uniform(-scale, scale) * min(left_gap, right_gap)
            moved.append(xs[k] + shift)
        initial = tuple((x, rho) for x, (_, rho) in zip(moved, road.initial))
        roads.append(RoadSpec(road.id, road.a, road.b, initial))
    return replace(spec, roads=tuple(roads))


class SimulationService:
    """Main service for building, running and sweeping simulations."""

    def __init__(self, settings: Optional[Settings] = None):
        """Initialize simulation service with settings."""
        self.settings = settings or Settings()

    def build(self, scenario: ScenarioId, params: Optional[ScenarioParameters] = None) -> NetworkSpec:
        """Build a scenario with settings-level defaults for delta and horizon."""
        return build_scenario(
            scenario,
            params,
            default_delta=self.settings.tracking.delta,
            default_horizon=self.settings.tracking.horizon,
        )

    def validate(self, path: Union[str, Path]) -> NetworkSpec:
        """Parse and validate a network document without running it."""
        spec = load_network(
            path, self.settings.tracking.delta, self.settings.tracking.horizon
        )
        for warning in spec.warnings:
            logger.warning(warning)
        return spec

    def create_engine(
        self, spec: NetworkSpec, max_events: Optional[int] = None, debug: bool = False
    ) -> TrackingEngine:
        engine_settings = self.settings.engine
        return TrackingEngine(
            spec,
            max_events=max_events or engine_settings.max_events,
            time_tolerance=engine_settings.time_tolerance,
            debug_checks=debug or engine_settings.debug_checks,
        )

    def run(
        self,
        spec: NetworkSpec,
        snapshot_times: Sequence[float] = (),
        observers: Sequence[Observer] = (),
        max_events: Optional[int] = None,
        debug: bool = False,
    ) -> RunResult:
        """Run to the network horizon, capturing snapshots at the requested times."""
        engine = self.create_engine(spec, max_events, debug)
        recorder = TelemetryRecorder(spec)
        initial = engine.initialize()
        recorder.record_initial(initial)
        for observer in observers:
            observer(initial, None)

        watchers = [recorder, *observers]
        snapshots: Dict[float, Snapshot] = {}
        times = sorted({t for t in snapshot_times if 0.0 <= t <= spec.horizon})
        for t in times:
            if t == 0.0:
                snapshots[t] = initial
                continue
            engine.run_until(t, watchers)
            snapshots[t] = engine.sample_state(t)

        result = engine.run_until(spec.horizon, watchers)
        result.samples = recorder.samples
        result.snapshots = snapshots
        return result

    def sweep(
        self,
        cases: Sequence[SweepCase],
        workers: Optional[int] = None,
    ) -> List[SweepRow]:
        """Run independent cases, concurrently when more than one worker is allowed."""
        workers = workers or self.settings.sweep.workers
        if workers <= 1 or len(cases) <= 1:
            rows = [run_case(case) for case in cases]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(run_case, cases))
        logger.info("Sweep finished: %d runs", len(rows))
        return sorted(rows, key=lambda row: row.run)

    def seed_cases(
        self, spec: NetworkSpec, seeds: Iterable[int], max_events: Optional[int] = None
    ) -> List[SweepCase]:
        """Cases with randomly shifted initial breakpoints, one per seed."""
        return [
            SweepCase(
                run=k,
                label=f"seed={seed}",
                spec=jitter_breakpoints(spec, seed),
                max_events=max_events or self.settings.engine.max_events,
                time_tolerance=self.settings.engine.time_tolerance,
            )
            for k, seed in enumerate(seeds)
        ]

    def beta_cases(
        self,
        params: ScenarioParameters,
        beta1_values: Iterable[float],
        max_events: Optional[int] = None,
    ) -> List[SweepCase]:
        """Traffic-light cases, one per beta1 value."""
        cases = []
        for k, beta1 in enumerate(beta1_values):
            spec = self.build(ScenarioId.TRAFFIC_LIGHT_SWAP, replace(params, beta1=beta1))
            cases.append(
                SweepCase(
                    run=k,
                    label=f"beta1={beta1:g}",
                    spec=spec,
                    max_events=max_events or self.settings.engine.max_events,
                    time_tolerance=self.settings.engine.time_tolerance,
                )
            )
        if not cases:
            raise ScenarioError("A beta1 sweep needs at least one value")
        return cases
