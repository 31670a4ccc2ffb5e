"""PDE model definitions: fluxes, state conversions, initial and boundary data.

Two conservation-law models are provided:

* the one-way wave equation du/dt - du/dx = 0, written in conservation form
  with flux F(u) = -u, and
* the 1D compressible Euler system in conserved variables (rho, rho*u, E).

The Euler closure is p = rho*T with E = rho*u^2/2 + rho*T, which is the
ideal-gas law with gamma = 2: p = (gamma-1)*(E - rho*u^2/2) and sound speed
c = sqrt(2*p/rho). Note this differs from air (gamma = 1.4).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import StateValidityError

GAMMA = 2.0


class ModelKind(enum.Enum):
    ONE_WAY_WAVE = "one-way-wave"
    EULER_1D = "euler-1d"


class BoundaryKind(enum.Enum):
    DIRICHLET_BOTH = "dirichlet-both"
    DIRICHLET_RIGHT_OUTFLOW_LEFT = "dirichlet-right-outflow-left"


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class ModelSpec:
    """A conservation-law model: flux, initial data, and boundary treatment.

    ``initial_condition`` holds one scalar function of x per conserved
    component. ``zero_flux`` is a degenerate variant (F identically 0) used
    by fixed-point checks. Immutable; all operations on it are pure.
    """

    kind: ModelKind
    n_components: int
    initial_condition: tuple[Callable[[float], float], ...]
    boundary_kind: BoundaryKind
    domain: tuple[float, float] = (0.0, 1.0)
    zero_flux: bool = False

    def __post_init__(self) -> None:
        expected = 1 if self.kind is ModelKind.ONE_WAY_WAVE else 3
        if self.n_components != expected:
            raise ValueError(
                f"{self.kind.value} model requires {expected} components, "
                f"got {self.n_components}"
            )
        if len(self.initial_condition) != self.n_components:
            raise ValueError("one initial-condition function per component required")


@dataclass(frozen=True)
class EulerPrimitive:
    """Primitive Euler state (density, velocity, pressure)."""

    rho: float
    u: float
    p: float

    def __post_init__(self) -> None:
        if not self.rho > 0:
            raise StateValidityError(f"density must be positive, got rho={self.rho}")
        if not self.p > 0:
            raise StateValidityError(f"pressure must be positive, got p={self.p}")


@dataclass(frozen=True)
class EulerConserved:
    """Conserved Euler state (density, momentum, total energy)."""

    rho: float
    mom: float
    E: float

    def __post_init__(self) -> None:
        if not self.rho > 0:
            raise StateValidityError(f"density must be positive, got rho={self.rho}")
        internal = self.E - 0.5 * self.mom**2 / self.rho
        if not internal > 0:
            raise StateValidityError(
                f"internal energy must be positive, got {internal} "
                f"for (rho, mom, E)=({self.rho}, {self.mom}, {self.E})"
            )


def conserved_to_primitive(U: EulerConserved) -> EulerPrimitive:
    """Convert (rho, rho*u, E) to (rho, u, p) with p = (gamma-1)(E - rho*u^2/2)."""
    if U.rho <= 0:
        raise StateValidityError(f"cannot divide by density rho={U.rho}")
    u = U.mom / U.rho
    p = (GAMMA - 1.0) * (U.E - 0.5 * U.mom * u)
    if p <= 0:
        raise StateValidityError(f"computed pressure {p} is not positive")
    return EulerPrimitive(U.rho, u, p)


def primitive_to_conserved(w: EulerPrimitive) -> EulerConserved:
    """Convert (rho, u, p) to (rho, rho*u, E) with E = rho*u^2/2 + p/(gamma-1)."""
    mom = w.rho * w.u
    E = 0.5 * w.rho * w.u**2 + w.p / (GAMMA - 1.0)
    return EulerConserved(w.rho, mom, E)


def _check_euler_arrays(
    rho: np.ndarray, mom: np.ndarray, E: np.ndarray, check: str
) -> None:
    if check == "none":
        return
    bad_rho = rho <= 0
    if bad_rho.any():
        i = int(np.argmax(bad_rho))
        raise StateValidityError(f"non-positive density {rho[i]} at index {i}")
    if check == "density":
        return
    internal = E - 0.5 * mom * mom / rho
    bad = internal <= 0
    if bad.any():
        i = int(np.argmax(bad))
        raise StateValidityError(
            f"non-positive internal energy {internal[i]} at index {i} "
            f"(rho={rho[i]}, mom={mom[i]}, E={E[i]})"
        )


def primitive_arrays(
    values: np.ndarray, check: str = "full"
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized conserved -> (rho, u, p) for a (3, n) array of Euler states.

    ``check`` selects the validity guard: "full" rejects non-positive density
    or internal energy, "density" rejects non-positive density only (the flux
    algebra is rational in the state, so negative-pressure transients still
    evaluate to finite values), "none" converts whatever it is given.
    """
    rho, mom, E = values
    _check_euler_arrays(rho, mom, E, check)
    u = mom / rho
    p = (GAMMA - 1.0) * (E - 0.5 * mom * u)
    return rho, u, p


def flux_values(model: ModelSpec, values: np.ndarray, check: str = "full") -> np.ndarray:
    """Flux F(u) evaluated columnwise on a (m, n) array of states."""
    values = np.asarray(values, dtype=float)
    if model.zero_flux:
        return np.zeros_like(values)
    if model.kind is ModelKind.ONE_WAY_WAVE:
        return -values
    rho, u, p = primitive_arrays(values, check)
    E = values[2]
    return np.stack([values[1], values[1] * u + p, (E + p) * u])


def flux(model: ModelSpec, state_at_point: np.ndarray) -> np.ndarray:
    """Flux of one m-vector state; validates Euler positivity first."""
    state = np.atleast_1d(np.asarray(state_at_point, dtype=float))
    return flux_values(model, state[:, np.newaxis])[:, 0]


def flux_jacobians(model: ModelSpec, values: np.ndarray, check: str = "full") -> np.ndarray:
    """dF/dU at every column of a (m, n) state array, shape (n, m, m)."""
    values = np.asarray(values, dtype=float)
    m, n = values.shape
    if model.zero_flux:
        return np.zeros((n, m, m))
    if model.kind is ModelKind.ONE_WAY_WAVE:
        return np.full((n, 1, 1), -1.0)
    rho, u, p = primitive_arrays(values, check)
    E = values[2]
    H = (E + p) / rho
    J = np.empty((n, 3, 3))
    J[:, 0, 0] = 0.0
    J[:, 0, 1] = 1.0
    J[:, 0, 2] = 0.0
    J[:, 1, 0] = 0.5 * (GAMMA - 3.0) * u * u
    J[:, 1, 1] = (3.0 - GAMMA) * u
    J[:, 1, 2] = GAMMA - 1.0
    J[:, 2, 0] = 0.5 * (GAMMA - 1.0) * u**3 - u * H
    J[:, 2, 1] = H - (GAMMA - 1.0) * u * u
    J[:, 2, 2] = GAMMA * u
    return J


def max_signal_speed(model: ModelSpec, values: np.ndarray) -> float:
    """Largest characteristic speed over a (m, n) state array (CFL control)."""
    if model.kind is ModelKind.ONE_WAY_WAVE:
        return 1.0
    rho, u, p = primitive_arrays(np.asarray(values, dtype=float))
    return float(np.max(np.abs(u) + np.sqrt(GAMMA * p / rho)))


def signal_speeds(model: ModelSpec, values: np.ndarray) -> np.ndarray:
    """Per-column characteristic speed bound |u| + c for a (m, n) state array."""
    values = np.asarray(values, dtype=float)
    if model.kind is ModelKind.ONE_WAY_WAVE:
        return np.ones(values.shape[1])
    rho, u, p = primitive_arrays(values)
    return np.abs(u) + np.sqrt(GAMMA * p / rho)


def boundary_value(model: ModelSpec, side: Side, t: float) -> np.ndarray:
    """Dirichlet data at a domain endpoint, as an m-vector of conserved values.

    Wave: u(1, t) = sin(pi t)^2 for t <= 1 and 0 afterwards; the left end is
    held at 0 (the leftward wave entering at x = 1, t = 0 reaches x = 0 only
    at t = 1). Euler: the initial-condition values at that endpoint, frozen.
    """
    if model.kind is ModelKind.ONE_WAY_WAVE:
        if side is Side.RIGHT and t <= 1.0:
            return np.array([math.sin(math.pi * t) ** 2])
        return np.array([0.0])
    x = model.domain[0] if side is Side.LEFT else model.domain[1]
    return np.array([ic(x) for ic in model.initial_condition], dtype=float)


def wave_model() -> ModelSpec:
    """One-way wave equation on [0, 1]: zero initial data, sin^2 inflow at x=1."""
    return ModelSpec(
        kind=ModelKind.ONE_WAY_WAVE,
        n_components=1,
        initial_condition=(lambda x: 0.0,),
        boundary_kind=BoundaryKind.DIRICHLET_BOTH,
        domain=(0.0, 1.0),
    )


def sod_model() -> ModelSpec:
    """Sod shock tube on [0, 1]: (rho, u, p) = (8, 0, 8) left of 0.5, (1, 0, 1) right.

    The point at exactly x = 0.5 takes the right state (half-open convention
    [0, 0.5) / [0.5, 1]). Initial E equals p here because u = 0 and gamma = 2.
    """

    def rho0(x: float) -> float:
        return 8.0 if x < 0.5 else 1.0

    def mom0(x: float) -> float:
        return 0.0

    def energy0(x: float) -> float:
        p = 8.0 if x < 0.5 else 1.0
        return p / (GAMMA - 1.0)

    return ModelSpec(
        kind=ModelKind.EULER_1D,
        n_components=3,
        initial_condition=(rho0, mom0, energy0),
        boundary_kind=BoundaryKind.DIRICHLET_BOTH,
        domain=(0.0, 1.0),
    )


def with_zero_flux(model: ModelSpec) -> ModelSpec:
    """Degenerate copy of a model whose flux (and Jacobian) are identically zero."""
    return ModelSpec(
        kind=model.kind,
        n_components=model.n_components,
        initial_condition=model.initial_condition,
        boundary_kind=model.boundary_kind,
        domain=model.domain,
        zero_flux=True,
    )
