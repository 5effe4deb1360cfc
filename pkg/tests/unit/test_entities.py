"""Tests for core data entities."""

import numpy as np
import pytest

from netwave.core.entities import (
    EventKind,
    FeasibleRegion,
    Front,
    FunctionalSample,
    JunctionSolution,
    RoadSnapshot,
    RunResult,
    Snapshot,
    Wave,
    WaveFan,
)
from netwave.exceptions import ValidationError


class TestWave:
    """Test Wave data structure."""

    def test_valid_wave(self):
        """Test strength and rarefaction flag."""
        wave = Wave(0.8, 0.6, -0.4)
        assert wave.strength == pytest.approx(0.2)
        assert wave.is_rarefaction

    def test_null_jump_rejected(self):
        """Test that equal states are not a wave."""
        with pytest.raises(ValidationError, match="two different densities"):
            Wave(0.3, 0.3, 0.0)

    def test_density_range(self):
        """Test densities outside [0, 1]."""
        with pytest.raises(ValidationError, match="outside"):
            Wave(0.3, 1.2, 0.0)


class TestWaveFan:
    """Test WaveFan data structure."""

    def test_values_and_speeds(self):
        """Test breakpoint values and speeds of a chained fan."""
        fan = WaveFan((Wave(0.8, 0.6, -1.6), Wave(0.6, 0.5, -0.4)))
        assert fan.values == (0.8, 0.6, 0.5)
        assert fan.speeds == (-1.6, -0.4)
        assert len(fan) == 2
        assert not fan.is_empty

    def test_empty_fan(self):
        """Test the fan of a trivial Riemann problem."""
        fan = WaveFan()
        assert fan.is_empty
        assert fan.values == ()

    def test_broken_chain(self):
        """Test that fan waves must share states."""
        with pytest.raises(ValidationError, match="do not chain"):
            WaveFan((Wave(0.8, 0.6, -1.6), Wave(0.5, 0.4, 0.4)))

    def test_speed_order(self):
        """Test that speeds must not decrease."""
        with pytest.raises(ValidationError, match="non-decreasing"):
            WaveFan((Wave(0.8, 0.6, -0.4), Wave(0.6, 0.5, -1.6)))


class TestFeasibleRegion:
    """Test FeasibleRegion data structure."""

    @pytest.fixture
    def region(self):
        return FeasibleRegion(
            demands=np.array([1.0, 0.5]),
            supplies=np.array([0.8, 1.0]),
            matrix=np.array([[0.5, 0.5], [0.5, 0.5]]),
        )

    def test_dimensions(self, region):
        """Test n and m."""
        assert (region.n, region.m) == (2, 2)

    def test_contains(self, region):
        """Test membership with tolerance."""
        assert region.contains(np.array([1.0, 0.5]))
        assert not region.contains(np.array([1.0, 0.7]))
        assert region.contains(np.array([1.0 + 1e-13, 0.5]))

    def test_shape_mismatch(self):
        """Test demands that do not match the matrix."""
        with pytest.raises(ValidationError, match="Expected 2 demands"):
            FeasibleRegion(np.array([1.0]), np.array([1.0]), np.array([[0.5, 0.5]]))

    def test_negative_supply(self):
        """Test negative bounds."""
        with pytest.raises(ValidationError, match="non-negative"):
            FeasibleRegion(np.array([1.0]), np.array([-0.1]), np.array([[1.0]]))


class TestJunctionSolution:
    """Test JunctionSolution data structure."""

    def test_densities_and_residual(self):
        """Test ordering and flux balance."""
        solution = JunctionSolution(
            incoming_fluxes=(0.5, 0.25),
            outgoing_fluxes=(0.75,),
            incoming_densities=(0.6, 0.7),
            outgoing_densities=(0.2,),
            incoming_fans=(WaveFan(), WaveFan()),
            outgoing_fans=(WaveFan(),),
        )
        assert solution.densities == (0.6, 0.7, 0.2)
        assert solution.balance_residual == 0.0
        assert solution.is_trivial


class TestFront:
    """Test Front data structure."""

    def test_position(self):
        """Test ballistic motion from the creation point."""
        front = Front(uid=1, road_id="r", x0=0.25, t0=1.0, rho_l=0.2, rho_r=0.5, speed=0.3)
        assert front.position(3.0) == pytest.approx(0.85)

    def test_null_jump(self):
        """Test that a front must carry a jump."""
        with pytest.raises(ValidationError, match="null jump"):
            Front(uid=1, road_id="r", x0=0.0, t0=0.0, rho_l=0.4, rho_r=0.4, speed=0.0)


class TestEventKind:
    """Test event ordering ranks."""

    def test_ranks(self):
        """Test that schedule jumps come first and collisions last."""
        kinds = sorted(EventKind, key=lambda kind: kind.rank)
        assert kinds == [
            EventKind.SCHEDULE_JUMP,
            EventKind.JUNCTION_ARRIVAL,
            EventKind.BOUNDARY_EXIT,
            EventKind.COLLISION,
        ]


class TestSnapshots:
    """Test RoadSnapshot and Snapshot data structures."""

    def test_segments_and_traces(self):
        """Test segment triples and end traces."""
        road = RoadSnapshot("r", 0.0, 1.0, (0.25, 0.5), (0.1, 0.4, 0.9))
        assert road.segments() == [(0.0, 0.25, 0.1), (0.25, 0.5, 0.4), (0.5, 1.0, 0.9)]
        assert road.left_trace == 0.1
        assert road.right_trace == 0.9

    def test_density_is_right_continuous(self):
        """Test lookup at and between breakpoints."""
        road = RoadSnapshot("r", 0.0, 1.0, (0.25,), (0.1, 0.4))
        assert road.density_at(0.1) == 0.1
        assert road.density_at(0.25) == 0.4

    def test_layout_mismatch(self):
        """Test values that do not match the breakpoints."""
        with pytest.raises(ValidationError, match="2 values for 2 breakpoints"):
            RoadSnapshot("r", 0.0, 1.0, (0.25, 0.5), (0.1, 0.4))

    def test_unknown_road(self):
        """Test lookup of a missing road."""
        snapshot = Snapshot(time=0.0, roads={})
        with pytest.raises(ValidationError, match="no road x"):
            snapshot.road("x")


class TestSamplesAndResults:
    """Test FunctionalSample and RunResult."""

    def test_negative_functional(self):
        """Test that functionals are non-negative."""
        with pytest.raises(ValidationError, match="tv_flux must be non-negative"):
            FunctionalSample(0.0, 0, 0.1, -0.1, 0, 1.0)

    def test_final_sample(self):
        """Test the last sample of a run."""
        final = Snapshot(time=1.0, roads={})
        result = RunResult(horizon=1.0, event_count=0, final=final)
        assert result.final_sample is None
        result.samples.append(FunctionalSample(1.0, 0, 0.0, 0.0, 0, 0.0))
        assert result.final_sample.time == 1.0
