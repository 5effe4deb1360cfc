"""Monitoring functionals: variation, big-wave count, L1 distance, mass."""

import logging
from typing import Dict, List, Optional

import numpy as np

from ..exceptions import ParameterError, ValidationError
from .entities import EventRecord, FunctionalSample, RoadSnapshot, Snapshot
from .flux import FluxFamily, FluxModel
from .network import NetworkSpec

logger = logging.getLogger(__name__)


def _sign(value: float) -> int:
    return (value > 0.0) - (value < 0.0)


def total_variation(snapshot: Snapshot) -> float:
    """Sum over roads of the density jumps; nothing is counted across junctions."""
    return float(
        sum(np.abs(np.diff(np.asarray(road.values))).sum() for road in snapshot.roads.values())
    )


def flux_total_variation(snapshot: Snapshot, model: FluxModel) -> float:
    """Sum over roads of the flux jumps."""
    total = 0.0
    for road in snapshot.roads.values():
        fluxes = model.eval_flux_array(np.asarray(road.values))
        total += float(np.abs(np.diff(fluxes)).sum())
    return total


def junction_bad_counts(snapshot: Snapshot, spec: NetworkSpec) -> Dict[str, int]:
    """Phi_J per junction: incoming traces in [0, sigma] plus outgoing traces in [sigma, 1]."""
    sigma = spec.flux.sigma
    counts = {}
    for junction in spec.junctions:
        bad = sum(1 for r in junction.incoming if snapshot.road(r).right_trace <= sigma)
        bad += sum(1 for r in junction.outgoing if snapshot.road(r).left_trace >= sigma)
        counts[junction.id] = bad
    return counts


def road_big_waves(road: RoadSnapshot, sigma: float) -> int:
    """G^i: jumps with sgn(rho_l - sigma) * sgn(rho_r - sigma) <= 0, using sgn(0) = 0."""
    return sum(
        1
        for left, right in zip(road.values, road.values[1:])
        if left != right and _sign(left - sigma) * _sign(right - sigma) <= 0
    )


def big_wave_count(
    snapshot: Snapshot, spec: NetworkSpec, model: Optional[FluxModel] = None
) -> int:
    """N = sum of Phi_J over junctions plus sum of G^i over roads."""
    sigma = (model or spec.flux).sigma
    bad = sum(junction_bad_counts(snapshot, spec).values())
    waves = sum(road_big_waves(road, sigma) for road in snapshot.roads.values())
    return bad + waves


def _check_same_network(first: Snapshot, second: Snapshot) -> None:
    if list(first.roads) != list(second.roads):
        raise ValidationError("Snapshots belong to different networks")
    for road_id, road in first.roads.items():
        other = second.roads[road_id]
        if (road.a, road.b) != (other.a, other.b):
            raise ValidationError(f"Road {road_id} spans differ between snapshots")


def l1_distance(first: Snapshot, second: Snapshot) -> float:
    """Exact L1 distance by integrating over merged breakpoints."""
    _check_same_network(first, second)
    total = 0.0
    for road_id, road in first.roads.items():
        other = second.roads[road_id]
        edges = np.unique(np.concatenate(([road.a, road.b], road.breakpoints, other.breakpoints)))
        widths = np.diff(edges)
        mids = 0.5 * (edges[:-1] + edges[1:])
        left = np.asarray(road.values)[np.searchsorted(road.breakpoints, mids, side="right")]
        right = np.asarray(other.values)[np.searchsorted(other.breakpoints, mids, side="right")]
        total += float(np.sum(np.abs(left - right) * widths))
    return total


def total_mass(snapshot: Snapshot) -> float:
    """Sum over roads of the integral of the density."""
    total = 0.0
    for road in snapshot.roads.values():
        edges = np.concatenate(([road.a], road.breakpoints, [road.b]))
        total += float(np.dot(np.diff(edges), road.values))
    return total


def sample_functionals(snapshot: Snapshot, spec: NetworkSpec, event_index: int) -> FunctionalSample:
    """Evaluate every functional on one snapshot."""
    bad_counts = junction_bad_counts(snapshot, spec)
    waves = sum(road_big_waves(road, spec.flux.sigma) for road in snapshot.roads.values())
    return FunctionalSample(
        time=snapshot.time,
        event_index=event_index,
        tv_density=total_variation(snapshot),
        tv_flux=flux_total_variation(snapshot, spec.flux),
        big_wave_count=sum(bad_counts.values()) + waves,
        mass=total_mass(snapshot),
        junction_bad_counts=bad_counts,
    )


def density_tv_bound(sample: FunctionalSample, model: FluxModel) -> float:
    """Upper bound tv_flux / c_lo + N on the density variation (kinked fluxes only)."""
    if model.family is not FluxFamily.KINKED:
        raise ParameterError("The density bound needs a kinked flux with c_lo > 0", "family",
                             model.family.value)
    return sample.tv_flux / model.c_lo + sample.big_wave_count


class TelemetryRecorder:
    """Observer collecting a FunctionalSample after each event and at the horizon."""

    def __init__(self, spec: NetworkSpec):
        self.spec = spec
        self.samples: List[FunctionalSample] = []
        self.records: List[Optional[EventRecord]] = []

    def record_initial(self, snapshot: Snapshot) -> FunctionalSample:
        sample = sample_functionals(snapshot, self.spec, 0)
        self.samples.append(sample)
        self.records.append(None)
        return sample

    def __call__(self, snapshot: Snapshot, record: Optional[EventRecord]) -> None:
        index = record.index if record is not None else self._last_index()
        self.samples.append(sample_functionals(snapshot, self.spec, index))
        self.records.append(record)

    def _last_index(self) -> int:
        return self.samples[-1].event_index if self.samples else 0

    def event_samples(self) -> List[FunctionalSample]:
        """Samples taken right after events, in order, with the initial sample first."""
        return [
            sample
            for sample, record in zip(self.samples, self.records)
            if record is not None or sample is self.samples[0]
        ]
