"""Property tests over randomized networks: big-wave count, flux variation, L1 and refinement."""

from dataclasses import replace
from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from netwave.core.entities import EventKind
from netwave.core.flux import Branch, FluxModel, build_kinked_approximation, flux_sup_distance
from netwave.core.functionals import big_wave_count, flux_total_variation, l1_distance
from netwave.core.network import (
    DistributionMatrix,
    JunctionSpec,
    NetworkSpec,
    RoadSpec,
    ScheduleEntry,
)
from netwave.core.tracking import TrackingEngine
from netwave.parsers.network_config import load_network

FIXTURES = Path(__file__).parent.parent / "fixtures"

DELTA = 0.02
HORIZON = 2.0
MAX_BREAKPOINTS = 10
CUTS = 20
KINKED = build_kinked_approximation(FluxModel.smooth(), 0.05)
SPLIT = ((0.2, 0.3), (0.8, 0.7))

pytestmark = pytest.mark.slow

suite_settings = settings(
    max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)


@st.composite
def road_data(draw, road_id, delta=DELTA, free_flow=False, a=0.0, b=1.0):
    """Road [a, b] with piecewise-constant data on the delta grid.

    With free_flow every value lies strictly below the critical density 1/2.
    """
    levels = round(1.0 / delta)
    top = levels // 2 - 1 if free_flow else levels
    cuts = sorted(
        draw(st.lists(st.integers(1, CUTS - 1), max_size=MAX_BREAKPOINTS, unique=True))
    )
    values = draw(
        st.lists(st.integers(0, top), min_size=len(cuts) + 1, max_size=len(cuts) + 1)
    )
    xs = [a] + [a + (b - a) * c / CUTS for c in cuts]
    return RoadSpec(road_id, a, b, tuple((x, k * delta) for x, k in zip(xs, values)))


@st.composite
def distribution_matrices(draw, n, m):
    """m x n matrix that never binds a supply in free flow.

    One incoming road splits freely; two incoming roads share each outgoing
    road through a doubly stochastic matrix with distinct entries per row.
    """
    if m == 1:
        return DistributionMatrix(((1.0,) * n,))
    share = draw(st.sampled_from([0.2, 0.3, 0.4, 0.6, 0.7, 0.8]))
    if n == 1:
        return DistributionMatrix(((share,), (1.0 - share,)))
    return DistributionMatrix(((share, 1.0 - share), (1.0 - share, share)))


@st.composite
def free_flow_networks(draw, flux=None, schedules=False, delta=DELTA, horizon=HORIZON):
    """Chains of 1-4 junctions (1x1, 1x2 or 2x2) with every density below 1/2."""
    road_ids = []
    junctions = []
    dangling = []

    def new_road():
        road_ids.append(f"r{len(road_ids)}")
        return road_ids[-1]

    for k in range(draw(st.integers(1, 4))):
        n = draw(st.integers(1, 2))
        m = draw(st.integers(n, 2))
        incoming = []
        if dangling and draw(st.booleans()):
            incoming.append(dangling.pop(0))
        while len(incoming) < n:
            incoming.append(new_road())
        outgoing = [new_road() for _ in range(m)]
        dangling.extend(outgoing)

        entries = [ScheduleEntry(0.0, draw(distribution_matrices(n, m)))]
        if schedules:
            t_switch = draw(st.sampled_from([0.25, 0.5, 1.0, 1.5]))
            entries.append(ScheduleEntry(t_switch, draw(distribution_matrices(n, m))))
        junctions.append(JunctionSpec(f"J{k}", tuple(incoming), tuple(outgoing), tuple(entries)))

    roads = tuple(draw(road_data(road_id, delta, free_flow=True)) for road_id in road_ids)
    return NetworkSpec(
        roads,
        tuple(junctions),
        flux=flux or FluxModel.smooth(),
        delta=delta,
        horizon=horizon,
    )


def trace(spec, quantity):
    """Values of quantity after initialization and after every event."""
    engine = TrackingEngine(spec, max_events=200_000)
    values = [(None, quantity(engine.initialize()))]

    def observe(snapshot, record):
        if record is not None:
            values.append((record, quantity(snapshot)))

    engine.run_until(spec.horizon, [observe])
    return values


def increases(values):
    return [
        (record, after - before)
        for (_, before), (record, after) in zip(values, values[1:])
        if after > before
    ]


def around(values, kind, road_id):
    """(value before, record, value after) for the first matching event."""
    for (_, before), (record, after) in zip(values, values[1:]):
        if record.kind is kind and record.road_id == road_id:
            return before, record, after
    raise AssertionError(f"No {kind.value} event on road {road_id}")


class TestBigWaveCount:
    """The big-wave count never grows along a run."""

    @suite_settings
    @given(road_data("r"))
    def test_non_increasing_on_a_road(self, road):
        spec = NetworkSpec((road,), (), delta=DELTA, horizon=HORIZON)
        values = trace(spec, lambda snapshot: big_wave_count(snapshot, spec))
        assert increases(values) == []

    @suite_settings
    @given(free_flow_networks())
    def test_non_increasing_in_free_flow(self, spec):
        values = trace(spec, lambda snapshot: big_wave_count(snapshot, spec))
        assert increases(values) == []

    def test_congested_trace_relaxing_to_sigma_adds_two(self):
        """sigma is bad on both sides of a junction and a wave touching it is big."""
        spec = NetworkSpec(
            (
                RoadSpec.constant("r0", 0.0, 1.0, 0.46),
                RoadSpec("r1", 0.0, 1.0, ((0.0, 0.0), (0.05, 0.08))),
                RoadSpec.constant("r2", 1.0, 2.0, 0.0),
                RoadSpec.constant("r3", 1.0, 2.0, 0.0),
            ),
            (JunctionSpec.static("J", ("r0", "r1"), ("r2", "r3"), SPLIT),),
            delta=DELTA,
            horizon=0.3,
        )
        values = trace(spec, lambda snapshot: big_wave_count(snapshot, spec))
        before, record, after = around(values, EventKind.JUNCTION_ARRIVAL, "r1")

        assert record.time == pytest.approx(0.95 / 3.68)
        assert record.rho_before[0] > spec.flux.sigma
        assert record.rho_after[0] == spec.flux.sigma
        assert after - before == 2


class TestFluxVariation:
    """Flux variation with a kinked flux on free-flow junctions of at most two roads per side."""

    @suite_settings
    @given(free_flow_networks(flux=KINKED))
    def test_non_increasing_without_schedules(self, spec):
        values = trace(spec, lambda snapshot: flux_total_variation(snapshot, spec.flux))
        assert [
            (record, growth) for record, growth in increases(values) if growth > 1e-9
        ] == []

    @suite_settings
    @given(free_flow_networks(flux=KINKED, schedules=True))
    def test_schedule_jumps_are_bounded(self, spec):
        values = trace(spec, lambda snapshot: flux_total_variation(snapshot, spec.flux))
        fmax = spec.flux.fmax
        for record, growth in increases(values):
            if record.kind is EventKind.SCHEDULE_JUMP:
                assert growth <= 4.0 * fmax + 1e-9
            else:
                assert growth <= 1e-9 * fmax, record

    def test_backward_wave_from_outgoing_road_amplifies_flux_jump(self):
        """Losing supply on one outgoing road throttles the incoming road and its sibling."""
        d1 = KINKED.eval_flux(0.08)
        level = KINKED.invert_flux(0.7 * d1, Branch.ASCENDING)
        spec = NetworkSpec(
            (
                RoadSpec.constant("r0", 0.0, 1.0, 0.0),
                RoadSpec.constant("r1", 0.0, 1.0, 0.08),
                RoadSpec.constant("r2", 1.0, 2.0, 0.0),
                RoadSpec("r3", 1.0, 2.0, ((1.0, level), (1.05, 0.96))),
            ),
            (JunctionSpec.static("J", ("r0", "r1"), ("r2", "r3"), SPLIT),),
            flux=KINKED,
            delta=DELTA,
            horizon=1.0,
        )
        values = trace(spec, lambda snapshot: flux_total_variation(snapshot, spec.flux))
        before, record, after = around(values, EventKind.JUNCTION_ARRIVAL, "r3")

        lost_supply = 0.7 * d1 - KINKED.eval_flux(0.96)
        assert before == pytest.approx(lost_supply, rel=1e-9)
        assert after == pytest.approx(lost_supply * 1.3 / 0.7, rel=1e-9)
        assert record.rho_after[1] > spec.flux.sigma


class TestL1Contraction:
    """Two runs on one road never drift apart in L1."""

    SAMPLE_TIMES = [0.05 * k for k in range(1, 21)]

    @settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(road_data("r", delta=0.01), st.data())
    def test_shifted_breakpoint(self, road, data):
        if not road.breakpoints:
            road = RoadSpec("r", 0.0, 1.0, ((0.0, 0.8), (0.5, 0.1)))
        index = data.draw(st.integers(1, len(road.initial) - 1))
        lower = road.initial[index - 1][0]
        upper = road.initial[index + 1][0] if index + 1 < len(road.initial) else road.b
        x, rho = road.initial[index]
        shifted_x = data.draw(
            st.floats(lower, upper, exclude_min=True, exclude_max=True).filter(lambda s: s != x)
        )
        shifted = replace(
            road, initial=road.initial[:index] + ((shifted_x, rho),) + road.initial[index + 1:]
        )

        first = TrackingEngine(NetworkSpec((road,), (), delta=0.01, horizon=1.0))
        second = TrackingEngine(NetworkSpec((shifted,), (), delta=0.01, horizon=1.0))
        initial = l1_distance(first.initialize(), second.initialize())
        for t in self.SAMPLE_TIMES:
            distance = l1_distance(first.run_until(t).final, second.run_until(t).final)
            assert distance <= initial + 1e-9, t


class TestRefinement:
    """Halving delta and nu together brings successive runs closer."""

    def test_successive_differences_decrease(self):
        base = load_network(FIXTURES / "two_by_two.json")
        horizon = 1.0
        finals = []
        fluxes = []
        delta, nu = 0.04, 0.1
        for _ in range(5):
            flux = build_kinked_approximation(FluxModel.smooth(base.flux.fmax), nu)
            spec = replace(base, flux=flux, delta=delta, horizon=horizon, warnings=[])
            finals.append(TrackingEngine(spec).run_until(horizon).final)
            fluxes.append(flux)
            delta, nu = delta / 2, nu / 2

        differences = [l1_distance(coarse, fine) for coarse, fine in zip(finals, finals[1:])]
        assert len(differences) == 4
        assert all(a > b for a, b in zip(differences, differences[1:])), differences

        # f_nu - f_{nu/2} = (nu / 2) * (T - f), largest at rho = 1/4.
        flux_gaps = [flux_sup_distance(coarse, fine) for coarse, fine in zip(fluxes, fluxes[1:])]
        assert flux_gaps == pytest.approx([flux.nu / 8 for flux in fluxes[:-1]], rel=1e-12)
