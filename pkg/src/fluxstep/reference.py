"""Classical oracles: analytic wave solution, first-order upwind, and a
second-order MUSCL finite-volume solver.

The MUSCL scheme uses minmod-limited linear reconstruction of primitive
variables, the Rusanov (local Lax-Friedrichs) interface flux, and two-stage
SSP Runge-Kutta in time. Grid nodes are treated as cell centers of width dx;
Dirichlet ghost cells carry the model's boundary states (constant initial
endpoint values for Euler, the time-dependent inflow trace for the wave
model, evaluated at each stage time).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError, StateValidityError
from .mesh import Grid1D, StateField
from .models import (
    GAMMA,
    ModelKind,
    ModelSpec,
    Side,
    boundary_value,
    max_signal_speed,
    primitive_arrays,
)
from .trainer import Trajectory, initial_state


def analytic_wave(x, t: float):
    """Exact solution of du/dt - du/dx = 0 with zero initial data and
    sin^2(pi t) inflow at x = 1: constant along characteristics x + t = const."""
    x = np.asarray(x, dtype=float)
    s = t - (1.0 - x)
    u = np.where((s >= 0.0) & (s <= 1.0), np.sin(np.pi * np.clip(s, 0.0, 1.0)) ** 2, 0.0)
    return float(u) if u.ndim == 0 else u


def upwind_step(
    u: np.ndarray, dx: float, dt: float, boundary_right: float
) -> np.ndarray:
    """One upwind step for leftward unit-speed transport.

    u_i <- u_i + (dt/dx)(u_{i+1} - u_i); the rightmost node takes the inflow
    value. Requires dt/dx <= 1 (exact shift at equality).
    """
    c = dt / dx
    if c > 1.0 + 1e-12:
        raise ConfigurationError(f"CFL number dt/dx = {c} exceeds 1")
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    out[:-1] = u[:-1] + c * (u[1:] - u[:-1])
    out[-1] = boundary_right
    return out


def upwind_solve(
    model: ModelSpec,
    grid: Grid1D,
    dt: float,
    t_final: float,
    snapshot_stride: int = 1,
) -> Trajectory:
    """Drive upwind_step from the model's initial data (wave model only)."""
    if model.kind is not ModelKind.ONE_WAY_WAVE:
        raise ConfigurationError("the upwind driver handles the wave model only")
    state = initial_state(model, grid)
    snapshots = [state]
    n_steps = max(0, int(np.ceil(t_final / dt - 0.5)))
    u = state.values[0]
    for k in range(1, n_steps + 1):
        t_new = k * dt
        u = upwind_step(u, grid.dx, dt, boundary_value(model, Side.RIGHT, t_new)[0])
        if k % snapshot_stride == 0:
            snapshots.append(StateField(grid, u[np.newaxis, :], time=t_new))
    return Trajectory(tuple(snapshots))


class Limiter(enum.Enum):
    MINMOD = "minmod"


class RiemannSolver(enum.Enum):
    RUSANOV = "rusanov"


class TimeIntegrator(enum.Enum):
    SSPRK2 = "ssprk2"


@dataclass(frozen=True)
class MusclConfig:
    cfl: float = 0.4
    limiter: Limiter = Limiter.MINMOD
    riemann: RiemannSolver = RiemannSolver.RUSANOV
    time_integrator: TimeIntegrator = TimeIntegrator.SSPRK2

    def __post_init__(self) -> None:
        if not (0.0 < self.cfl < 1.0):
            raise ConfigurationError(f"cfl must lie in (0, 1), got {self.cfl}")


def minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Smallest-magnitude slope where signs agree, zero otherwise."""
    return 0.5 * (np.sign(a) + np.sign(b)) * np.minimum(np.abs(a), np.abs(b))


def _to_recon(model: ModelSpec, U: np.ndarray) -> np.ndarray:
    if model.kind is ModelKind.ONE_WAY_WAVE:
        return np.array(U, dtype=float)
    return np.stack(primitive_arrays(U))


def _recon_to_conserved(model: ModelSpec, W: np.ndarray, where: str) -> np.ndarray:
    if model.kind is ModelKind.ONE_WAY_WAVE:
        return W
    rho, u, p = W
    bad = (rho <= 0.0) | (p <= 0.0)
    if bad.any():
        i = int(np.argmax(bad))
        raise StateValidityError(
            f"positivity lost in {where} at face {i}: rho={rho[i]}, p={p[i]}"
        )
    return np.stack([rho, rho * u, 0.5 * rho * u * u + p / (GAMMA - 1.0)])


def _recon_flux(model: ModelSpec, W: np.ndarray) -> np.ndarray:
    if model.kind is ModelKind.ONE_WAY_WAVE:
        return -W
    rho, u, p = W
    E = 0.5 * rho * u * u + p / (GAMMA - 1.0)
    return np.stack([rho * u, rho * u * u + p, (E + p) * u])


def _recon_speed(model: ModelSpec, W: np.ndarray) -> np.ndarray:
    if model.kind is ModelKind.ONE_WAY_WAVE:
        return np.ones(W.shape[1])
    rho, u, p = W
    return np.abs(u) + np.sqrt(GAMMA * p / rho)


def _ghost_states(
    model: ModelSpec | None, U: np.ndarray, t: float
) -> tuple[np.ndarray, np.ndarray]:
    """Ghost-cell values in reconstruction variables at stage time t."""
    if model is None:
        return U[:, 0].copy(), U[:, -1].copy()
    left = boundary_value(model, Side.LEFT, t)[:, np.newaxis]
    right = boundary_value(model, Side.RIGHT, t)[:, np.newaxis]
    return _to_recon(model, left)[:, 0], _to_recon(model, right)[:, 0]


def _muscl_rhs(
    model: ModelSpec, U: np.ndarray, t: float, dx: float, ghost_model: ModelSpec | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flux-difference RHS plus the two boundary interface fluxes."""
    W = _to_recon(model, U)
    gl, gr = _ghost_states(ghost_model, W, t)
    m, n = W.shape
    Wx = np.empty((m, n + 4))
    Wx[:, 2:-2] = W
    Wx[:, 0] = Wx[:, 1] = gl
    Wx[:, -1] = Wx[:, -2] = gr

    dW = Wx[:, 1:] - Wx[:, :-1]
    slope = minmod(dW[:, 1:], dW[:, :-1])  # slopes for extended cells 1..n+2

    # faces j+1/2 between extended cells j and j+1, j = 1..n+1
    WL = Wx[:, 1:-2] + 0.5 * slope[:, :-1]
    WR = Wx[:, 2:-1] - 0.5 * slope[:, 1:]
    UL = _recon_to_conserved(model, WL, "left reconstruction")
    UR = _recon_to_conserved(model, WR, "right reconstruction")
    lam = np.maximum(_recon_speed(model, WL), _recon_speed(model, WR))
    F_hat = 0.5 * (_recon_flux(model, WL) + _recon_flux(model, WR)) - 0.5 * lam * (UR - UL)
    rhs = -(F_hat[:, 1:] - F_hat[:, :-1]) / dx
    return rhs, F_hat[:, 0], F_hat[:, -1]


def _check_positive(model: ModelSpec, U: np.ndarray, where: str) -> None:
    if model.kind is ModelKind.ONE_WAY_WAVE:
        return
    rho = U[0]
    p = (GAMMA - 1.0) * (U[2] - 0.5 * U[1] * U[1] / np.maximum(rho, 1e-300))
    bad = (rho <= 0.0) | (p <= 0.0)
    if bad.any():
        i = int(np.argmax(bad))
        raise StateValidityError(
            f"positivity lost {where} at cell {i}: rho={rho[i]}, p={p[i]}"
        )


def _muscl_step_detail(
    U: StateField,
    config: MusclConfig,
    model: ModelSpec | None = None,
    dt_cap: float | None = None,
) -> tuple[StateField, float, np.ndarray, np.ndarray]:
    """One SSP-RK2 step; also returns the effective boundary interface fluxes."""
    values = U.values
    flux_model = model if model is not None else _plain_euler(values.shape[0])
    dx = U.grid.dx
    speed = max_signal_speed(flux_model, values)
    dt = config.cfl * dx / speed
    if dt_cap is not None:
        dt = min(dt, dt_cap)
    rhs1, fl1, fr1 = _muscl_rhs(flux_model, values, U.time, dx, model)
    U1 = values + dt * rhs1
    _check_positive(flux_model, U1, "after stage 1")
    rhs2, fl2, fr2 = _muscl_rhs(flux_model, U1, U.time + dt, dx, model)
    U2 = 0.5 * values + 0.5 * (U1 + dt * rhs2)
    _check_positive(flux_model, U2, "after stage 2")
    new = StateField(U.grid, U2, time=U.time + dt)
    return new, dt, 0.5 * (fl1 + fl2), 0.5 * (fr1 + fr2)


def _plain_euler(m: int) -> ModelSpec:
    if m == 1:
        from .models import wave_model

        return wave_model()
    from .models import sod_model

    return sod_model()


def muscl_step(
    U: StateField,
    config: MusclConfig,
    model: ModelSpec | None = None,
    dt_cap: float | None = None,
) -> tuple[StateField, float]:
    """One MUSCL step at the CFL-limited step size (optionally capped).

    Without a model the state is treated as Euler conserved variables and the
    ghost cells freeze the current endpoint values; passing the model supplies
    the proper Dirichlet boundary states instead.
    """
    new, dt, _, _ = _muscl_step_detail(U, config, model, dt_cap)
    return new, dt


def muscl_solve(
    model: ModelSpec,
    grid: Grid1D,
    t_final: float,
    config: MusclConfig,
    snapshot_times: tuple[float, ...] = (),
) -> Trajectory:
    """March MUSCL from the model's initial data to t_final.

    Steps use the CFL-limited size, clipped so every requested snapshot time
    and t_final land exactly. The returned trajectory carries a conservation
    audit: total mass change per component versus the accumulated boundary
    flux integrals.
    """
    if t_final < 0:
        raise ConfigurationError(f"t_final must be nonnegative, got {t_final}")
    state = initial_state(model, grid)
    snapshots = [state]
    stops = sorted({float(s) for s in snapshot_times if 0.0 < s <= t_final} | {t_final})
    mass0 = state.values.sum(axis=1) * grid.dx
    inflow = np.zeros(model.n_components)
    t = 0.0
    for stop in stops:
        if stop <= 0.0:
            continue
        while t < stop - 1e-13:
            state, dt, f_left, f_right = _muscl_step_detail(
                state, config, model, dt_cap=stop - t
            )
            inflow += dt * (f_left - f_right)
            t += dt
        state = StateField(state.grid, state.values, time=stop)
        t = stop
        snapshots.append(state)
    mass1 = state.values.sum(axis=1) * grid.dx
    conservation = {
        "initial_mass": mass0,
        "final_mass": mass1,
        "boundary_inflow": inflow,
        "defect": mass1 - mass0 - inflow,
    }
    if t_final == 0.0:
        snapshots = [snapshots[0]]
    return Trajectory(tuple(snapshots), conservation=conservation)
