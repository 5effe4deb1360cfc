"""Concave flux functions for the LWR model and their kinked approximations."""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np
from scipy.optimize import brentq

from ..exceptions import FluxDomainError, InfeasibleFluxError, ParameterError, ValidationError

# Relative slack on flux levels coming out of floating point arithmetic.
FLUX_TOLERANCE = 1e-12
_ROOT_XTOL = 1e-15


class FluxFamily(Enum):
    """Available flux families."""

    SMOOTH = "smooth"
    KINKED = "kinked"


class Branch(Enum):
    """Monotone branch of the flux used for inversion."""

    ASCENDING = "ascending"
    DESCENDING = "descending"


class Side(Enum):
    """One-sided derivative selector at the kink."""

    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class FluxModel:
    """Strictly concave flux on [0, 1] with f(0) = f(1) = 0.

    The smooth family is the reference quadratic 4*fmax*rho*(1 - rho). The
    kinked family is the convex combination (1 - nu)*f + nu*T of a smooth base
    with the tent T through (0, 0), (sigma, fmax), (1, 0); its derivative stays
    bounded away from zero off the critical density.
    """

    family: FluxFamily = FluxFamily.SMOOTH
    fmax: float = 1.0
    nu: Optional[float] = None
    base: Optional["FluxModel"] = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.fmax) and self.fmax > 0.0):
            raise ValidationError(f"fmax must be positive and finite, got {self.fmax}")

        if self.family is FluxFamily.KINKED:
            if self.base is None or self.base.family is not FluxFamily.SMOOTH:
                raise ValidationError("Kinked flux requires a smooth base flux")
            if self.nu is None or not (0.0 < self.nu < 1.0):
                raise ValidationError(f"Kinked flux requires nu in (0, 1), got {self.nu}")
            if self.base.fmax != self.fmax:
                raise ValidationError("Kinked flux must share fmax with its base")

    @classmethod
    def smooth(cls, fmax: float = 1.0) -> "FluxModel":
        """Reference quadratic flux with maximum fmax at density 1/2."""
        return cls(family=FluxFamily.SMOOTH, fmax=fmax)

    @property
    def sigma(self) -> float:
        """Critical density, the unique maximizer of f."""
        return 0.5

    @property
    def c_lo(self) -> float:
        """Lower bound of |f'| away from sigma (zero for the smooth family)."""
        if self.family is FluxFamily.SMOOTH:
            return 0.0
        return self.nu * self.fmax * min(1.0 / self.sigma, 1.0 / (1.0 - self.sigma))

    @property
    def c_hi(self) -> float:
        """Upper bound of |f'| on [0, 1]."""
        smooth_bound = 4.0 * self.fmax
        if self.family is FluxFamily.SMOOTH:
            return smooth_bound
        tent_slope = self.fmax * max(1.0 / self.sigma, 1.0 / (1.0 - self.sigma))
        return (1.0 - self.nu) * smooth_bound + self.nu * tent_slope

    def eval_flux(self, rho: float) -> float:
        """Evaluate f(rho)."""
        self._check_density(rho)
        if self.family is FluxFamily.SMOOTH:
            return 4.0 * self.fmax * rho * (1.0 - rho)
        return (1.0 - self.nu) * self.base.eval_flux(rho) + self.nu * self._tent(rho)

    def eval_flux_array(self, rho: np.ndarray) -> np.ndarray:
        """Vectorised f over an array of densities in [0, 1]."""
        rho = np.asarray(rho, dtype=float)
        if np.any((rho < 0.0) | (rho > 1.0)) or np.any(np.isnan(rho)):
            raise FluxDomainError("Densities must lie in [0, 1]", float(np.nanmax(rho)))
        smooth = 4.0 * self.fmax * rho * (1.0 - rho)
        if self.family is FluxFamily.SMOOTH:
            return smooth
        tent = np.where(
            rho <= self.sigma,
            self.fmax * rho / self.sigma,
            self.fmax * (1.0 - rho) / (1.0 - self.sigma),
        )
        return (1.0 - self.nu) * smooth + self.nu * tent

    def eval_tau(self, rho: float) -> float:
        """Return the other density carrying the same flux; tau(sigma) = sigma."""
        self._check_density(rho)
        if rho == self.sigma:
            return self.sigma
        branch = Branch.DESCENDING if rho < self.sigma else Branch.ASCENDING
        return self.invert_flux(self.eval_flux(rho), branch)

    def demand(self, rho: float) -> float:
        """Largest flux an incoming road with trace rho can send."""
        return self.eval_flux(rho) if rho <= self.sigma else self._checked_fmax(rho)

    def supply(self, rho: float) -> float:
        """Largest flux an outgoing road with trace rho can absorb."""
        return self._checked_fmax(rho) if rho <= self.sigma else self.eval_flux(rho)

    def invert_flux(self, phi: float, branch: Branch) -> float:
        """Density on the given branch whose flux equals phi."""
        slack = FLUX_TOLERANCE * self.fmax
        if not math.isfinite(phi) or phi > self.fmax + slack:
            raise InfeasibleFluxError(
                f"Flux {phi} exceeds the maximum {self.fmax}", phi, self.fmax
            )
        if phi < -slack:
            raise InfeasibleFluxError(f"Flux {phi} is negative", phi, self.fmax)
        phi = min(max(phi, 0.0), self.fmax)

        if self.family is FluxFamily.SMOOTH:
            half_width = 0.5 * math.sqrt(max(0.0, 1.0 - phi / self.fmax))
            if branch is Branch.ASCENDING:
                return self.sigma - half_width
            return self.sigma + half_width

        if phi >= self.fmax:
            return self.sigma
        if phi <= 0.0:
            return 0.0 if branch is Branch.ASCENDING else 1.0
        lo, hi = (0.0, self.sigma) if branch is Branch.ASCENDING else (self.sigma, 1.0)
        root = brentq(lambda x: self.eval_flux(x) - phi, lo, hi, xtol=_ROOT_XTOL)
        return min(max(float(root), lo), hi)

    def char_speed(self, rho: float, side: Optional[Side] = None) -> float:
        """Characteristic speed f'(rho); at the kink a side must be given."""
        self._check_density(rho)
        smooth_slope = 4.0 * self.fmax * (1.0 - 2.0 * rho)
        if self.family is FluxFamily.SMOOTH:
            return smooth_slope

        if rho == self.sigma and side is None:
            raise FluxDomainError(
                "Kinked flux has no derivative at sigma; pass side=Side.LEFT or Side.RIGHT",
                rho,
            )
        on_left = rho < self.sigma or (rho == self.sigma and side is Side.LEFT)
        tent_slope = (
            self.fmax / self.sigma if on_left else -self.fmax / (1.0 - self.sigma)
        )
        return (1.0 - self.nu) * smooth_slope + self.nu * tent_slope

    def rh_speed(self, rho_l: float, rho_r: float) -> float:
        """Rankine-Hugoniot speed of the jump (rho_l, rho_r)."""
        if rho_l == rho_r:
            raise ValidationError("Rankine-Hugoniot speed undefined for a null jump")
        return (self.eval_flux(rho_r) - self.eval_flux(rho_l)) / (rho_r - rho_l)

    def to_config(self) -> Dict[str, Any]:
        """Document form used by the network configuration schema."""
        if self.family is FluxFamily.SMOOTH:
            return {"family": "smooth", "fmax": self.fmax}
        return {"family": "kinked", "fmax": self.fmax, "nu": self.nu}

    def _tent(self, rho: float) -> float:
        if rho <= self.sigma:
            return self.fmax * rho / self.sigma
        return self.fmax * (1.0 - rho) / (1.0 - self.sigma)

    def _checked_fmax(self, rho: float) -> float:
        self._check_density(rho)
        return self.fmax

    @staticmethod
    def _check_density(rho: float) -> None:
        if not (0.0 <= rho <= 1.0):
            raise FluxDomainError(f"Density {rho} outside [0, 1]", rho)


def build_kinked_approximation(base: FluxModel, nu: float) -> FluxModel:
    """Kinked approximation f_nu = (1 - nu) f + nu T of a smooth flux.

    The result shares sigma and fmax with the base, satisfies
    c_lo <= |f_nu'| <= c_hi off sigma, and lies within nu * fmax of the base
    in sup norm.
    """
    if base.family is not FluxFamily.SMOOTH:
        raise ParameterError("Kinked approximations are built from a smooth flux", "base", base)
    if not (0.0 < nu < 1.0):
        raise ParameterError(f"nu must lie in (0, 1), got {nu}", "nu", nu)
    return FluxModel(family=FluxFamily.KINKED, fmax=base.fmax, nu=nu, base=base)


def flux_sup_distance(first: FluxModel, second: FluxModel, points: int = 10_001) -> float:
    """Sup-norm distance between two fluxes sampled on a uniform grid."""
    grid = np.linspace(0.0, 1.0, points)
    return float(np.max(np.abs(first.eval_flux_array(grid) - second.eval_flux_array(grid))))


def flux_from_config(config: Dict[str, Any]) -> FluxModel:
    """Build a flux model from its document form."""
    family = config.get("family", "smooth")
    fmax = float(config.get("fmax", 1.0))
    base = FluxModel.smooth(fmax)
    if family == "smooth":
        return base
    if family == "kinked":
        return build_kinked_approximation(base, float(config["nu"]))
    raise ParameterError(f"Unknown flux family: {family}", "family", family)
