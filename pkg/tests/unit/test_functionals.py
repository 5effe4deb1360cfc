"""Tests for monitoring functionals."""

import pytest

from netwave.core.entities import EventKind, EventRecord, FunctionalSample, RoadSnapshot, Snapshot
from netwave.core.flux import FluxModel, build_kinked_approximation
from netwave.core.functionals import (
    TelemetryRecorder,
    big_wave_count,
    density_tv_bound,
    flux_total_variation,
    junction_bad_counts,
    l1_distance,
    road_big_waves,
    sample_functionals,
    total_mass,
    total_variation,
)
from netwave.core.network import JunctionSpec, NetworkSpec, RoadSpec
from netwave.exceptions import ParameterError, ValidationError


@pytest.fixture
def spec():
    roads = (
        RoadSpec.constant("in", -1.0, 0.0, 0.3),
        RoadSpec.constant("out", 0.0, 1.0, 0.7),
    )
    return NetworkSpec(roads, (JunctionSpec.static("J", ("in",), ("out",), ((1.0,),)),))


def snapshot_of(**roads):
    return Snapshot(time=0.0, roads=dict(roads))


class TestVariation:
    """Test total variation of densities and fluxes."""

    def test_density_variation_sums_roads(self):
        snapshot = snapshot_of(
            a=RoadSnapshot("a", 0.0, 1.0, (0.5,), (0.2, 0.6)),
            b=RoadSnapshot("b", 1.0, 2.0, (1.2, 1.4), (0.9, 0.1, 0.3)),
        )
        assert total_variation(snapshot) == pytest.approx(0.4 + 0.8 + 0.2)

    def test_flux_variation(self):
        snapshot = snapshot_of(a=RoadSnapshot("a", 0.0, 1.0, (0.5,), (0.25, 0.75)))
        assert flux_total_variation(snapshot, FluxModel.smooth()) == pytest.approx(0.0)
        snapshot = snapshot_of(a=RoadSnapshot("a", 0.0, 1.0, (0.5,), (0.25, 0.5)))
        assert flux_total_variation(snapshot, FluxModel.smooth()) == pytest.approx(0.25)

    def test_junctions_do_not_count(self, spec):
        snapshot = snapshot_of(
            **{
                "in": RoadSnapshot("in", -1.0, 0.0, (), (0.3,)),
                "out": RoadSnapshot("out", 0.0, 1.0, (), (0.7,)),
            }
        )
        assert total_variation(snapshot) == 0.0


class TestBigWaves:
    """Test the big-wave count."""

    def test_road_big_waves(self):
        road = RoadSnapshot("r", 0.0, 1.0, (0.2, 0.4, 0.6), (0.1, 0.3, 0.7, 0.5))
        assert road_big_waves(road, 0.5) == 2

    def test_sigma_counts_as_straddling(self):
        road = RoadSnapshot("r", 0.0, 1.0, (0.5,), (0.52, 0.5))
        assert road_big_waves(road, 0.5) == 1

    def test_bad_traces(self, spec):
        snapshot = snapshot_of(
            **{
                "in": RoadSnapshot("in", -1.0, 0.0, (), (0.3,)),
                "out": RoadSnapshot("out", 0.0, 1.0, (), (0.7,)),
            }
        )
        assert junction_bad_counts(snapshot, spec) == {"J": 2}
        snapshot = snapshot_of(
            **{
                "in": RoadSnapshot("in", -1.0, 0.0, (), (0.8,)),
                "out": RoadSnapshot("out", 0.0, 1.0, (), (0.2,)),
            }
        )
        assert junction_bad_counts(snapshot, spec) == {"J": 0}

    def test_total_count(self, spec):
        snapshot = snapshot_of(
            **{
                "in": RoadSnapshot("in", -1.0, 0.0, (-0.5,), (0.8, 0.5)),
                "out": RoadSnapshot("out", 0.0, 1.0, (), (0.2,)),
            }
        )
        assert big_wave_count(snapshot, spec) == 2


class TestDistances:
    """Test L1 distance and mass."""

    def test_l1_distance(self):
        first = snapshot_of(a=RoadSnapshot("a", 0.0, 1.0, (0.5,), (0.2, 0.6)))
        second = snapshot_of(a=RoadSnapshot("a", 0.0, 1.0, (0.7,), (0.2, 0.6)))
        assert l1_distance(first, second) == pytest.approx(0.2 * 0.4)
        assert l1_distance(first, first) == 0.0

    def test_l1_needs_same_network(self):
        first = snapshot_of(a=RoadSnapshot("a", 0.0, 1.0, (), (0.2,)))
        second = snapshot_of(b=RoadSnapshot("b", 0.0, 1.0, (), (0.2,)))
        with pytest.raises(ValidationError, match="different networks"):
            l1_distance(first, second)

    def test_total_mass(self):
        snapshot = snapshot_of(
            a=RoadSnapshot("a", 0.0, 1.0, (0.5,), (0.2, 0.6)),
            b=RoadSnapshot("b", -2.0, 0.0, (), (0.5,)),
        )
        assert total_mass(snapshot) == pytest.approx(0.1 + 0.3 + 1.0)


class TestSamples:
    """Test samples and the telemetry recorder."""

    def test_sample_functionals(self, spec):
        snapshot = snapshot_of(
            **{
                "in": RoadSnapshot("in", -1.0, 0.0, (-0.5,), (0.25, 0.5)),
                "out": RoadSnapshot("out", 0.0, 1.0, (), (0.7,)),
            }
        )
        sample = sample_functionals(snapshot, spec, event_index=3)
        assert sample.event_index == 3
        assert sample.tv_density == pytest.approx(0.25)
        assert sample.tv_flux == pytest.approx(0.25)
        assert sample.big_wave_count == 1 + 1 + 1
        assert sample.junction_bad_counts == {"J": 1 + 1}
        assert sample.mass == pytest.approx(0.125 + 0.25 + 0.7)

    def test_density_bound_needs_kinked_flux(self):
        sample = FunctionalSample(0.0, 0, 0.5, 0.2, 3, 1.0)
        kinked = build_kinked_approximation(FluxModel.smooth(), 0.05)
        assert density_tv_bound(sample, kinked) == pytest.approx(0.2 / 0.1 + 3)
        with pytest.raises(ParameterError, match="kinked"):
            density_tv_bound(sample, FluxModel.smooth())

    def test_recorder(self, spec):
        snapshot = snapshot_of(
            **{
                "in": RoadSnapshot("in", -1.0, 0.0, (), (0.3,)),
                "out": RoadSnapshot("out", 0.0, 1.0, (), (0.7,)),
            }
        )
        recorder = TelemetryRecorder(spec)
        recorder.record_initial(snapshot)
        record = EventRecord(index=1, time=0.5, kind=EventKind.COLLISION, road_id="in")
        recorder(snapshot, record)
        recorder(snapshot, None)
        assert [s.event_index for s in recorder.samples] == [0, 1, 1]
        assert len(recorder.event_samples()) == 2
