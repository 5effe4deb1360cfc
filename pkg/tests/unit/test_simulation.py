"""Tests for the simulation service."""

from pathlib import Path

import pytest

from netwave.core.entities import EventKind
from netwave.exceptions import ScenarioError
from netwave.infrastructure.settings import EngineSettings, Settings, SweepSettings
from netwave.parsers.network_config import load_network
from netwave.services.scenarios import ScenarioId, ScenarioParameters
from netwave.services.simulation import (
    SimulationService,
    SweepCase,
    jitter_breakpoints,
    run_case,
)

FIXTURES = Path(__file__).parent.parent / "fixtures"


class TestSimulationService:
    """Test running scenarios through the service."""

    @pytest.fixture
    def service(self):
        return SimulationService(Settings(sweep=SweepSettings(workers=1)))

    def test_build_uses_settings_delta(self):
        settings = Settings.model_validate({"tracking": {"delta": 0.05}})
        spec = SimulationService(settings).build(ScenarioId.APPENDIX_A)
        assert spec.delta == 0.05

    def test_run_collects_samples_and_snapshots(self, service):
        spec = service.build(ScenarioId.APPENDIX_A)
        result = service.run(spec, snapshot_times=[0.0, 0.25, 99.0])
        assert result.event_count == 1
        assert sorted(result.snapshots) == [0.0, 0.25]
        assert result.samples[0].event_index == 0
        assert result.final_sample.tv_flux == pytest.approx(0.75, abs=1e-10)
        assert result.snapshots[0.25].road("1").breakpoints == pytest.approx((-0.25,))

    def test_observers_see_every_event(self, service):
        seen = []
        spec = service.build(ScenarioId.TRAFFIC_LIGHT_SWAP)
        result = service.run(spec, observers=[lambda snapshot, record: seen.append(record)])
        events = [record for record in seen if record is not None]
        assert len(events) == result.event_count
        assert seen[0] is None
        assert events[0].kind is EventKind.SCHEDULE_JUMP

    def test_max_events_from_settings(self, mocker):
        settings = Settings(engine=EngineSettings(max_events=7, debug_checks=True))
        engine_class = mocker.patch("netwave.services.simulation.TrackingEngine")
        SimulationService(settings).create_engine(mocker.sentinel.spec)
        engine_class.assert_called_once_with(
            mocker.sentinel.spec, max_events=7, time_tolerance=1e-12, debug_checks=True
        )

    def test_validate(self, service):
        spec = service.validate(FIXTURES / "two_by_two.json")
        assert spec.warnings == []
        assert len(spec.roads) == 4


class TestSweeps:
    """Test independent sweep runs."""

    @pytest.fixture
    def service(self):
        return SimulationService(Settings(sweep=SweepSettings(workers=1)))

    def test_jitter_keeps_order(self):
        spec = load_network(FIXTURES / "ring.json")
        moved = jitter_breakpoints(spec, seed=3)
        for original, road in zip(spec.roads, moved.roads):
            assert road.values == original.values
            assert road.breakpoints != original.breakpoints
            assert all(road.a < x < road.b for x in road.breakpoints)

    def test_jitter_is_reproducible(self):
        spec = load_network(FIXTURES / "ring.json")
        assert jitter_breakpoints(spec, seed=5) == jitter_breakpoints(spec, seed=5)

    def test_run_case(self):
        spec = load_network(FIXTURES / "ring.json")
        row = run_case(SweepCase(0, "base", spec, max_events=100_000, time_tolerance=1e-12))
        assert row.events > 0
        assert row.mass == pytest.approx(0.2 * 0.3 + 0.7 * 0.3 + 0.4 * 0.4 + 0.9 * 0.5 + 0.1 * 0.5)

    def test_beta_sweep(self, service):
        cases = service.beta_cases(ScenarioParameters(beta2=0.3), [0.31, 0.35])
        rows = service.sweep(cases)
        assert [row.label for row in rows] == ["beta1=0.31", "beta1=0.35"]
        assert all(row.events > 0 for row in rows)

    def test_seed_sweep_in_worker_processes(self, service):
        spec = load_network(FIXTURES / "ring.json")
        cases = service.seed_cases(spec, range(2))
        rows = service.sweep(cases, workers=2)
        assert [row.run for row in rows] == [0, 1]
        assert [row.label for row in rows] == ["seed=0", "seed=1"]
        assert all(row.events > 0 for row in rows)

    def test_empty_beta_list(self, service):
        with pytest.raises(ScenarioError, match="at least one"):
            service.beta_cases(ScenarioParameters(), [])
