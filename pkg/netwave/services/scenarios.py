"""Built-in junction scenarios and custom network documents."""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from ..core.flux import Branch, FluxModel
from ..core.network import (
    DistributionMatrix,
    JunctionSpec,
    NetworkSpec,
    RoadSpec,
    ScheduleEntry,
)
from ..exceptions import ParameterError, ScenarioError
from ..parsers.network_config import DEFAULT_DELTA, DEFAULT_HORIZON, load_network

logger = logging.getLogger(__name__)

WAVE_START = -0.5
ARRIVAL_MARGIN = 0.05


class ScenarioId(Enum):
    """Available scenarios."""

    APPENDIX_A = "appendix_a"
    APPENDIX_B = "appendix_b"
    TRAFFIC_LIGHT_SWAP = "traffic_light_swap"
    CUSTOM = "custom"

    @classmethod
    def from_name(cls, name: str) -> "ScenarioId":
        for member in cls:
            if member.value == name:
                return member
        raise ScenarioError(
            f"Unknown scenario '{name}'. Choose one of: {', '.join(m.value for m in cls)}"
        )


@dataclass(frozen=True)
class ScenarioParameters:
    """Scenario knobs; None means the scenario default."""

    rho1_flux: Optional[float] = None
    alpha1: Optional[float] = None
    alpha2: Optional[float] = None
    beta1: Optional[float] = None
    beta2: Optional[float] = None
    t_bar: float = 1.0
    fmax: Optional[float] = None
    delta: Optional[float] = None
    horizon: Optional[float] = None
    path: Optional[str] = None
    with_wave: bool = True


def _in_open_unit(name: str, value: float) -> float:
    if not (0.0 < value < 1.0):
        raise ParameterError(f"{name} must lie in (0, 1), got {value}", name, value)
    return value


def _arrival_horizon(model: FluxModel, rho1: float, with_wave: bool) -> float:
    """Time just past the arrival of the (rho1, sigma) wave at the junction."""
    if not with_wave:
        return 1.0
    speed = model.rh_speed(rho1, model.sigma)
    return -WAVE_START / speed + ARRIVAL_MARGIN


def _incoming_road(road_id: str, value: float, wave_value: Optional[float] = None) -> RoadSpec:
    if wave_value is None:
        return RoadSpec.constant(road_id, -1.0, 0.0, value)
    return RoadSpec(road_id, -1.0, 0.0, ((-1.0, wave_value), (WAVE_START, value)))


def appendix_a_network(
    rho1_flux: float = 0.75,
    delta: float = DEFAULT_DELTA,
    horizon: Optional[float] = None,
    with_wave: bool = True,
) -> NetworkSpec:
    """Three-by-three junction whose flux variation grows after one small wave arrives.

    fmax is 1. Incoming roads carry sigma except road 2 (flux 1/3, congested);
    outgoing roads carry sigma except road 6 (flux 1/3, free). Road 1 holds
    the wave (rho1, sigma) with f(rho1) = rho1_flux.
    """
    _in_open_unit("rho1_flux", rho1_flux)
    model = FluxModel.smooth(1.0)
    sigma = model.sigma
    rho1 = model.invert_flux(rho1_flux, Branch.ASCENDING)
    rho2 = model.invert_flux(1.0 / 3.0, Branch.DESCENDING)
    rho6 = model.invert_flux(1.0 / 3.0, Branch.ASCENDING)

    roads = (
        _incoming_road("1", sigma, rho1 if with_wave else None),
        _incoming_road("2", rho2),
        _incoming_road("3", sigma),
        RoadSpec.constant("4", 0.0, 1.0, sigma),
        RoadSpec.constant("5", 0.0, 1.0, sigma),
        RoadSpec.constant("6", 0.0, 1.0, rho6),
    )
    junction = JunctionSpec.static(
        "J",
        ("1", "2", "3"),
        ("4", "5", "6"),
        (
            (1.0 / 2.0, 1.0 / 2.0, 1.0 / 3.0),
            (1.0 / 3.0, 1.0 / 2.0, 1.0 / 2.0),
            (1.0 / 6.0, 0.0, 1.0 / 6.0),
        ),
    )
    if horizon is None:
        horizon = _arrival_horizon(model, rho1, with_wave)
    return NetworkSpec(roads, (junction,), model, delta=delta, horizon=horizon)


def appendix_b_network(
    alpha1: float = 0.4,
    alpha2: float = 0.25,
    rho1_flux: float = 0.99,
    fmax: float = 1.0,
    delta: float = DEFAULT_DELTA,
    horizon: Optional[float] = None,
    with_wave: bool = True,
) -> NetworkSpec:
    """Two-by-two junction where a small incoming wave creates a big outgoing one.

    Roads 2 and 3 are congested with flux alpha1 / (1 - alpha2) * fmax, roads
    1 and 4 sit at sigma; road 1 holds the wave (rho1, sigma). The coefficient
    ordering is not checked here.
    """
    for name, value in (("alpha1", alpha1), ("alpha2", alpha2)):
        if not (0.0 < value < 0.5):
            raise ParameterError(f"{name} must lie in (0, 1/2), got {value}", name, value)
    _in_open_unit("rho1_flux", rho1_flux)
    model = FluxModel.smooth(fmax)
    sigma = model.sigma
    rho1 = model.invert_flux(rho1_flux * fmax, Branch.ASCENDING)
    congested = model.invert_flux(alpha1 / (1.0 - alpha2) * fmax, Branch.DESCENDING)

    roads = (
        _incoming_road("1", sigma, rho1 if with_wave else None),
        _incoming_road("2", congested),
        RoadSpec.constant("3", 0.0, 1.0, congested),
        RoadSpec.constant("4", 0.0, 1.0, sigma),
    )
    junction = JunctionSpec.static(
        "J", ("1", "2"), ("3", "4"), ((alpha1, alpha2), (1.0 - alpha1, 1.0 - alpha2))
    )
    if horizon is None:
        horizon = _arrival_horizon(model, rho1, with_wave)
    return NetworkSpec(roads, (junction,), model, delta=delta, horizon=horizon)


def traffic_light_swap_network(
    beta1: float = 0.4,
    beta2: float = 0.3,
    t_bar: float = 1.0,
    fmax: float = 1.0,
    delta: float = DEFAULT_DELTA,
    horizon: Optional[float] = None,
) -> NetworkSpec:
    """Two-by-two equilibrium whose distribution coefficients swap at t_bar."""
    if not (0.0 < beta2 <= beta1 < 0.5):
        raise ParameterError(
            f"Need 0 < beta2 <= beta1 < 1/2, got beta1={beta1}, beta2={beta2}", "beta1", beta1
        )
    if not t_bar > 0.0:
        raise ParameterError(f"t_bar must be positive, got {t_bar}", "t_bar", t_bar)
    model = FluxModel.smooth(fmax)
    sigma = model.sigma
    congested = model.invert_flux(beta1 / (1.0 - beta2) * fmax, Branch.DESCENDING)

    roads = (
        _incoming_road("1", sigma),
        _incoming_road("2", congested),
        RoadSpec.constant("3", 0.0, 1.0, congested),
        RoadSpec.constant("4", 0.0, 1.0, sigma),
    )
    before = DistributionMatrix(((beta1, beta2), (1.0 - beta1, 1.0 - beta2)))
    schedule = [ScheduleEntry(0.0, before)]
    if beta1 != beta2:
        after = DistributionMatrix(((beta2, beta1), (1.0 - beta2, 1.0 - beta1)))
        schedule.append(ScheduleEntry(t_bar, after))
    junction = JunctionSpec("J", ("1", "2"), ("3", "4"), tuple(schedule))
    if horizon is None:
        horizon = 2.0 * t_bar
    return NetworkSpec(roads, (junction,), model, delta=delta, horizon=horizon)


def build_scenario(
    scenario: ScenarioId,
    params: Optional[ScenarioParameters] = None,
    default_delta: float = DEFAULT_DELTA,
    default_horizon: float = DEFAULT_HORIZON,
) -> NetworkSpec:
    """Build the network for a scenario after checking its parameter ranges.

    Explicit parameters win over the network document, which wins over the
    given defaults. Built-in scenarios keep their own horizon unless one is
    passed explicitly.
    """
    params = params or ScenarioParameters()
    delta = params.delta if params.delta is not None else default_delta

    if scenario is ScenarioId.APPENDIX_A:
        if params.fmax is not None and params.fmax != 1.0:
            raise ParameterError(
                "appendix_a is defined for fmax = 1 only", "fmax", params.fmax
            )
        spec = appendix_a_network(
            rho1_flux=params.rho1_flux if params.rho1_flux is not None else 0.75,
            delta=delta,
            horizon=params.horizon,
            with_wave=params.with_wave,
        )

    elif scenario is ScenarioId.APPENDIX_B:
        alpha1 = params.alpha1 if params.alpha1 is not None else 0.4
        alpha2 = params.alpha2 if params.alpha2 is not None else 0.25
        if not (0.0 < alpha2 < alpha1 < 0.5):
            raise ParameterError(
                f"appendix_b needs 0 < alpha2 < alpha1 < 1/2, got alpha1={alpha1}, "
                f"alpha2={alpha2}",
                "alpha1",
                alpha1,
            )
        spec = appendix_b_network(
            alpha1=alpha1,
            alpha2=alpha2,
            rho1_flux=params.rho1_flux if params.rho1_flux is not None else 0.99,
            fmax=params.fmax if params.fmax is not None else 1.0,
            delta=delta,
            horizon=params.horizon,
            with_wave=params.with_wave,
        )

    elif scenario is ScenarioId.TRAFFIC_LIGHT_SWAP:
        spec = traffic_light_swap_network(
            beta1=params.beta1 if params.beta1 is not None else 0.4,
            beta2=params.beta2 if params.beta2 is not None else 0.3,
            t_bar=params.t_bar,
            fmax=params.fmax if params.fmax is not None else 1.0,
            delta=delta,
            horizon=params.horizon,
        )

    else:
        if not params.path:
            raise ScenarioError("The custom scenario needs a network document path")
        spec = load_network(params.path, default_delta, default_horizon)
        overrides = {}
        if params.delta is not None:
            overrides["delta"] = params.delta
        if params.horizon is not None:
            overrides["horizon"] = params.horizon
        if overrides:
            spec = replace(spec, **overrides)

    logger.info(
        "Built scenario %s: %d roads, delta=%g, horizon=%g",
        scenario.value,
        len(spec.roads),
        spec.delta,
        spec.horizon,
    )
    return spec
