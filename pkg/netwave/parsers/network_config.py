"""JSON network documents: schema, parsing into NetworkSpec and normalized output."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator
from pydantic import ValidationError as PydanticValidationError

from ..core.flux import flux_from_config
from ..core.network import (
    DistributionMatrix,
    JunctionSpec,
    NetworkSpec,
    RoadSpec,
    ScheduleEntry,
)
from ..exceptions import ConfigurationError, NetwaveException

logger = logging.getLogger(__name__)

SPEC_VERSION = 1
DEFAULT_DELTA = 0.02
DEFAULT_HORIZON = 10.0


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid")


class FluxDocument(_Document):
    family: Literal["smooth", "kinked"] = "smooth"
    fmax: PositiveFloat = 1.0
    nu: Optional[float] = None

    @model_validator(mode="after")
    def _check_nu(self) -> "FluxDocument":
        if self.family == "kinked":
            if self.nu is None:
                raise ValueError("kinked flux requires nu")
            if not (0.0 < self.nu < 1.0):
                raise ValueError(f"nu must lie in (0, 1), got {self.nu}")
        elif self.nu is not None:
            raise ValueError("nu is only meaningful for the kinked family")
        return self


class RoadDocument(_Document):
    id: str = Field(min_length=1)
    a: float
    b: float
    initial: List[Tuple[float, float]] = Field(min_length=1)


class ScheduleEntryDocument(_Document):
    t: float = Field(ge=0.0)
    matrix: List[List[float]] = Field(min_length=1)
    lights: Optional[List[int]] = None


class JunctionDocument(_Document):
    id: str = Field(min_length=1)
    incoming: List[str] = Field(min_length=1)
    outgoing: List[str] = Field(min_length=1)
    schedule: List[ScheduleEntryDocument] = Field(min_length=1)
    period: Optional[PositiveFloat] = None


class TrackingDocument(_Document):
    delta: Optional[PositiveFloat] = None
    horizon: Optional[PositiveFloat] = None


class NetworkDocument(_Document):
    spec_version: Literal[1] = SPEC_VERSION
    flux: FluxDocument = Field(default_factory=FluxDocument)
    roads: List[RoadDocument] = Field(min_length=1)
    junctions: List[JunctionDocument] = Field(default_factory=list)
    tracking: TrackingDocument = Field(default_factory=TrackingDocument)


def _dotted(loc: Tuple[Union[int, str], ...]) -> str:
    return ".".join(str(part) for part in loc)


def _domain(path: str, factory, *args, **kwargs):
    """Build a domain object, re-raising its validation error with a document path."""
    try:
        return factory(*args, **kwargs)
    except NetwaveException as e:
        raise ConfigurationError(str(e), path=path) from e


def _build_spec(
    document: NetworkDocument, default_delta: float, default_horizon: float
) -> NetworkSpec:
    roads = tuple(
        _domain(
            f"roads.{k}",
            RoadSpec,
            id=road.id,
            a=road.a,
            b=road.b,
            initial=tuple((float(x), float(rho)) for x, rho in road.initial),
        )
        for k, road in enumerate(document.roads)
    )
    known = {road.id for road in roads}

    junctions = []
    for k, junction in enumerate(document.junctions):
        for side in ("incoming", "outgoing"):
            for r, road_id in enumerate(getattr(junction, side)):
                if road_id not in known:
                    raise ConfigurationError(
                        f"unknown road id '{road_id}'", path=f"junctions.{k}.{side}.{r}"
                    )
        entries = []
        for l, entry in enumerate(junction.schedule):
            matrix = _domain(
                f"junctions.{k}.schedule.{l}.matrix",
                DistributionMatrix,
                tuple(tuple(float(v) for v in row) for row in entry.matrix),
            )
            lights = tuple(entry.lights) if entry.lights is not None else None
            entries.append(
                _domain(f"junctions.{k}.schedule.{l}", ScheduleEntry, entry.t, matrix, lights)
            )
        junctions.append(
            _domain(
                f"junctions.{k}",
                JunctionSpec,
                junction.id,
                tuple(junction.incoming),
                tuple(junction.outgoing),
                tuple(entries),
                junction.period,
            )
        )

    flux = _domain("flux", flux_from_config, document.flux.model_dump(exclude_none=True))
    delta = document.tracking.delta if document.tracking.delta is not None else default_delta
    horizon = (
        document.tracking.horizon if document.tracking.horizon is not None else default_horizon
    )
    return _domain(
        "junctions",
        NetworkSpec,
        roads=roads,
        junctions=tuple(junctions),
        flux=flux,
        delta=delta,
        horizon=horizon,
    )


def parse_network(
    text: str,
    default_delta: float = DEFAULT_DELTA,
    default_horizon: float = DEFAULT_HORIZON,
    source: Optional[str] = None,
) -> NetworkSpec:
    """Parse and validate a JSON network document.

    Tracking values present in the document win over the given defaults.

    Raises:
        ConfigurationError: with a dotted path to the offending field.
    """
    try:
        document = NetworkDocument.model_validate_json(text)
    except PydanticValidationError as e:
        first = e.errors()[0]
        path = _dotted(first.get("loc", ())) or None
        raise ConfigurationError(first.get("msg", str(e)), path=path, config_file=source) from e

    try:
        spec = _build_spec(document, default_delta, default_horizon)
    except ConfigurationError as e:
        e.config_file = source
        raise
    logger.info(
        "Parsed network with %d roads and %d junctions", len(spec.roads), len(spec.junctions)
    )
    return spec


def load_network(
    path: Union[str, Path],
    default_delta: float = DEFAULT_DELTA,
    default_horizon: float = DEFAULT_HORIZON,
) -> NetworkSpec:
    """Read and parse a network document from disk."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigurationError(f"Cannot read network file: {e}", config_file=str(path)) from e
    return parse_network(text, default_delta, default_horizon, source=str(path))


def network_to_document(spec: NetworkSpec) -> Dict[str, Any]:
    """Normalized document form of a spec, roads and junctions in declaration order."""
    return {
        "spec_version": SPEC_VERSION,
        "flux": spec.flux.to_config(),
        "roads": [
            {"id": road.id, "a": road.a, "b": road.b, "initial": [list(p) for p in road.initial]}
            for road in spec.roads
        ],
        "junctions": [
            {
                "id": junction.id,
                "incoming": list(junction.incoming),
                "outgoing": list(junction.outgoing),
                "schedule": [
                    {
                        "t": entry.t,
                        "matrix": [list(row) for row in entry.matrix.entries],
                        "lights": list(entry.lights) if entry.lights is not None else None,
                    }
                    for entry in junction.schedule
                ],
                "period": junction.period,
            }
            for junction in spec.junctions
        ],
        "tracking": {"delta": spec.delta, "horizon": spec.horizon},
    }


def serialize_network(spec: NetworkSpec) -> str:
    """Normalized JSON text; parsing it yields an equal spec."""
    return json.dumps(network_to_document(spec), indent=2)
