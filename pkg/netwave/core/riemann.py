"""Exact Riemann solvers on a road and at a junction."""

import itertools
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ValidationError
from .entities import FeasibleRegion, JunctionSolution, Wave, WaveFan
from .flux import Branch, FluxModel

logger = logging.getLogger(__name__)

# Relative to fmax: below this a flux equality is treated as exact.
SNAP_TOLERANCE = 1e-12
# Grid points closer than this to a fan end state are skipped.
GRID_MARGIN = 1e-12
_SINGULAR_DET = 1e-12


def _rarefaction_values(rho_l: float, rho_r: float, sigma: float, delta: float) -> List[float]:
    """Decreasing density values from rho_l to rho_r on the grid {k*delta} plus sigma."""
    interior = set()
    k_lo = int(math.floor(rho_r / delta))
    k_hi = int(math.ceil(rho_l / delta))
    for k in range(k_lo, k_hi + 1):
        value = k * delta
        if rho_r + GRID_MARGIN < value < rho_l - GRID_MARGIN:
            interior.add(value)
    if rho_r + GRID_MARGIN < sigma < rho_l - GRID_MARGIN:
        interior = {v for v in interior if abs(v - sigma) > GRID_MARGIN}
        interior.add(sigma)
    return [rho_l] + sorted(interior, reverse=True) + [rho_r]


def solve_road_riemann(rho_l: float, rho_r: float, model: FluxModel, delta: float) -> WaveFan:
    """Admissible front-tracking solution of the Riemann problem (rho_l, rho_r).

    Increasing jumps are single shocks. Decreasing jumps become fans of
    rarefaction shocks whose values follow the global grid {k*delta} with
    sigma inserted, each travelling at its Rankine-Hugoniot speed.
    """
    if not (delta > 0.0):
        raise ValidationError(f"delta must be positive, got {delta}")
    model.eval_flux(rho_l)
    model.eval_flux(rho_r)

    if rho_l == rho_r:
        return WaveFan()
    if rho_l < rho_r:
        return WaveFan((Wave(rho_l, rho_r, model.rh_speed(rho_l, rho_r)),))

    values = _rarefaction_values(rho_l, rho_r, model.sigma, delta)
    waves = tuple(
        Wave(left, right, model.rh_speed(left, right)) for left, right in zip(values, values[1:])
    )
    return WaveFan(waves)


def build_feasible_region(
    incoming_traces: Sequence[float],
    outgoing_traces: Sequence[float],
    matrix: np.ndarray,
    model: FluxModel,
    lights: Optional[Sequence[int]] = None,
) -> FeasibleRegion:
    """Demand box and supply half-spaces of a junction.

    A red light (chi_i = 0) closes road i: its demand is zero.
    """
    matrix = np.asarray(matrix, dtype=float)
    n = len(incoming_traces)
    chi = np.ones(n) if lights is None else np.asarray(lights, dtype=float)
    demands = np.array([model.demand(rho) for rho in incoming_traces]) * chi
    supplies = np.array([model.supply(rho) for rho in outgoing_traces])
    return FeasibleRegion(demands=demands, supplies=supplies, matrix=matrix)


def _constraint_system(region: FeasibleRegion) -> Tuple[np.ndarray, np.ndarray]:
    """Rows G, h of G @ gamma <= h describing the region."""
    n = region.n
    identity = np.eye(n)
    G = np.vstack([-identity, identity, region.matrix])
    h = np.concatenate([np.zeros(n), region.demands, region.supplies])
    return G, h


def enumerate_vertices(region: FeasibleRegion, tol: float = 1e-12) -> np.ndarray:
    """All vertices of the region, one per row."""
    G, h = _constraint_system(region)
    n = region.n
    subsets = np.array(list(itertools.combinations(range(G.shape[0]), n)))
    systems = G[subsets]
    rhs = h[subsets]
    regular = np.abs(np.linalg.det(systems)) > _SINGULAR_DET
    points = np.linalg.solve(systems[regular], rhs[regular][..., np.newaxis])[..., 0]
    scale = max(1.0, float(np.max(h)))
    feasible = np.all(points @ G.T <= h + tol * scale, axis=1)
    return points[feasible]


def maximize_through_flux(region: FeasibleRegion, tol: float = SNAP_TOLERANCE) -> np.ndarray:
    """Maximize E = sum(gamma) over the region by vertex enumeration.

    Among maximizers the lexicographically largest gamma is returned.
    Coordinates within tol * scale of 0 or of their demand are snapped.
    """
    scale = max(1.0, float(np.max(region.demands)), float(np.max(region.supplies)))
    slack = tol * scale
    vertices = enumerate_vertices(region, tol)
    if len(vertices) == 0:
        return np.zeros(region.n)

    totals = vertices.sum(axis=1)
    candidates = vertices[totals >= totals.max() - slack * region.n]
    for k in range(region.n):
        candidates = candidates[candidates[:, k] >= candidates[:, k].max() - slack]
    gamma = np.clip(candidates[0], 0.0, region.demands)
    gamma = np.where(np.abs(gamma - region.demands) <= slack, region.demands, gamma)
    gamma = np.where(gamma <= slack, 0.0, gamma)
    return gamma


def _incoming_state(trace: float, gamma: float, model: FluxModel, slack: float) -> float:
    if trace <= model.sigma and abs(gamma - model.demand(trace)) <= slack:
        return trace
    if trace >= model.sigma and abs(gamma - model.eval_flux(trace)) <= slack:
        return trace
    return model.invert_flux(gamma, Branch.DESCENDING)


def _outgoing_state(trace: float, gamma: float, model: FluxModel, slack: float) -> float:
    if trace >= model.sigma and abs(gamma - model.supply(trace)) <= slack:
        return trace
    if trace <= model.sigma and abs(gamma - model.eval_flux(trace)) <= slack:
        return trace
    return model.invert_flux(gamma, Branch.ASCENDING)


def solve_junction_riemann(
    incoming_traces: Sequence[float],
    outgoing_traces: Sequence[float],
    matrix: np.ndarray,
    model: FluxModel,
    delta: float,
    lights: Optional[Sequence[int]] = None,
) -> JunctionSolution:
    """Solve the Riemann problem at a junction.

    ``matrix`` holds the effective coefficients alpha_ji * chi_i. Incoming
    fans solve (trace_i, rho_hat_i) and move backwards; outgoing fans solve
    (rho_hat_j, trace_j) and move forwards.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (len(outgoing_traces), len(incoming_traces)):
        raise ValidationError(
            f"Matrix shape {matrix.shape} does not match "
            f"{len(outgoing_traces)}x{len(incoming_traces)} junction"
        )
    region = build_feasible_region(incoming_traces, outgoing_traces, matrix, model, lights)
    gamma_in = maximize_through_flux(region)
    gamma_out = np.clip(matrix @ gamma_in, 0.0, region.supplies)
    slack = SNAP_TOLERANCE * model.fmax

    rho_in = tuple(
        _incoming_state(trace, float(g), model, slack)
        for trace, g in zip(incoming_traces, gamma_in)
    )
    rho_out = tuple(
        _outgoing_state(trace, float(g), model, slack)
        for trace, g in zip(outgoing_traces, gamma_out)
    )
    fans_in = tuple(
        solve_road_riemann(trace, rho, model, delta) for trace, rho in zip(incoming_traces, rho_in)
    )
    fans_out = tuple(
        solve_road_riemann(rho, trace, model, delta) for trace, rho in zip(outgoing_traces, rho_out)
    )
    solution = JunctionSolution(
        incoming_fluxes=tuple(float(g) for g in gamma_in),
        outgoing_fluxes=tuple(float(g) for g in gamma_out),
        incoming_densities=rho_in,
        outgoing_densities=rho_out,
        incoming_fans=fans_in,
        outgoing_fans=fans_out,
    )
    logger.debug(
        "Junction solve: traces=%s -> %s, gamma=%s",
        tuple(incoming_traces) + tuple(outgoing_traces),
        solution.densities,
        solution.incoming_fluxes,
    )
    return solution
