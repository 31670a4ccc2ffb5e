"""Residual losses that drive the per-step network training.

Two forms are provided. The differential form penalizes the pointwise
strong-form residual using a forward difference in time (prediction minus
input over dt) and a one-sided difference of the flux in space. The integral
form penalizes per-cell residuals of the space-time integrated conservation
law, with the trapezoidal rule in both x and t. Both add the same squared
Dirichlet penalty at the domain endpoints, evaluated on the prediction at
the target time level t + dt.

Every loss is a plain sum of squares (hence nonnegative); a bare norm would
put the norm value into the gradient's denominator and blow up near zero
residuals. Gradients with respect to the predicted state are exact, with
flux Jacobians chained analytically.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .mesh import Grid1D, StateField
from .models import BoundaryKind, ModelSpec, Side, boundary_value, flux_jacobians, flux_values


class LossKind(enum.Enum):
    DIFFERENTIAL = "differential"
    INTEGRAL = "integral"


class Stencil(enum.Enum):
    BACKWARD = "backward"
    FORWARD = "forward"


@dataclass(frozen=True)
class LossForm:
    """Loss selector; the spatial stencil only applies to the differential form."""

    kind: LossKind
    stencil: Stencil = Stencil.BACKWARD


@dataclass(frozen=True)
class LossValue:
    """Scalar loss split into interior and boundary parts, plus its gradient.

    ``grad_wrt_prediction`` has the same (m, n_points) shape as the prediction.
    """

    total: float
    interior: float
    boundary: float
    grad_wrt_prediction: np.ndarray

    def __post_init__(self) -> None:
        if not np.isfinite(self.total):
            raise ArithmeticError(f"loss total is not finite: {self.total}")
        if not np.isfinite(self.grad_wrt_prediction).all():
            raise ArithmeticError("loss gradient contains non-finite entries")


def trapezoid_time(g_at_tk: float, g_at_tk1: float, dt: float) -> float:
    """Trapezoidal rule in time over one step: (g_k + g_{k+1}) * dt / 2."""
    return 0.5 * (g_at_tk + g_at_tk1) * dt


def trapezoid_space(g: np.ndarray, i_from: int, i_to: int, dx: float) -> float:
    """Composite trapezoidal rule over consecutive nodes i_from..i_to."""
    g = np.asarray(g, dtype=float)
    if not (0 <= i_from < i_to < g.shape[-1]):
        raise UsageError(
            f"need 0 <= i_from < i_to < {g.shape[-1]}, got ({i_from}, {i_to})"
        )
    seg = g[..., i_from : i_to + 1]
    return float(0.5 * dx * np.sum(seg[..., :-1] + seg[..., 1:]))


def _boundary_sides(model: ModelSpec, n_points: int) -> list[tuple[int, Side]]:
    if model.boundary_kind is BoundaryKind.DIRICHLET_RIGHT_OUTFLOW_LEFT:
        return [(n_points - 1, Side.RIGHT)]
    return [(0, Side.LEFT), (n_points - 1, Side.RIGHT)]


def _boundary_penalty(
    model: ModelSpec,
    u_pred: np.ndarray,
    t_next: float,
    weight: float,
    grad: np.ndarray,
) -> float:
    penalty = 0.0
    for idx, side in _boundary_sides(model, u_pred.shape[1]):
        diff = u_pred[:, idx] - boundary_value(model, side, t_next)
        penalty += weight * float(diff @ diff)
        grad[:, idx] += 2.0 * weight * diff
    return penalty


def differential_loss(
    model: ModelSpec,
    grid: Grid1D,
    u_n: StateField,
    u_pred: np.ndarray,
    dt: float,
    stencil: Stencil = Stencil.BACKWARD,
    dx_weighted: bool = True,
    boundary_weight: float = 1.0,
) -> LossValue:
    """Strong-form residual loss.

    The residual (pred - u_n)/dt + D_x F(pred) is evaluated at interior nodes
    only (the one-sided stencil needs a neighbor and the endpoints are handled
    by the Dirichlet penalty), squared, and summed with weight dx by default
    (a Riemann sum of the residual's squared norm over the domain).
    """
    if dt <= 0:
        raise UsageError(f"dt must be positive, got {dt}")
    u_pred = np.asarray(u_pred, dtype=float)
    u = u_n.values
    if u_pred.shape != u.shape:
        raise UsageError(f"prediction shape {u_pred.shape} != state shape {u.shape}")
    dx = grid.dx
    # the flux algebra is rational in the state, so mid-training predictions
    # with transient negative pressure (or density) still evaluate to finite
    # values; true numerical breakdown surfaces as a non-finite LossValue
    F = flux_values(model, u_pred, check="none")
    J = flux_jacobians(model, u_pred, check="none")

    # residual at grid nodes 1..n-2
    dudt = (u_pred[:, 1:-1] - u[:, 1:-1]) / dt
    if stencil is Stencil.BACKWARD:
        dFdx = (F[:, 1:-1] - F[:, 0:-2]) / dx
    else:
        dFdx = (F[:, 2:] - F[:, 1:-1]) / dx
    R = dudt + dFdx

    w = dx if dx_weighted else 1.0
    interior = w * float(np.sum(R * R))

    grad = np.zeros_like(u_pred)
    grad[:, 1:-1] += 2.0 * w * R / dt
    if stencil is Stencil.BACKWARD:
        # center node i carries +J_i/dx, left neighbor i-1 carries -J_{i-1}/dx
        grad[:, 1:-1] += (2.0 * w / dx) * np.einsum("kij,ik->jk", J[1:-1], R)
        grad[:, 0:-2] -= (2.0 * w / dx) * np.einsum("kij,ik->jk", J[0:-2], R)
    else:
        grad[:, 2:] += (2.0 * w / dx) * np.einsum("kij,ik->jk", J[2:], R)
        grad[:, 1:-1] -= (2.0 * w / dx) * np.einsum("kij,ik->jk", J[1:-1], R)

    boundary = _boundary_penalty(model, u_pred, u_n.time + dt, boundary_weight, grad)
    return LossValue(interior + boundary, interior, boundary, grad)


def integral_cell_residual(
    model: ModelSpec,
    u_n: StateField,
    u_pred: np.ndarray,
    k: int,
    dx: float,
    dt: float,
) -> np.ndarray:
    """Residual of the integrated conservation law on cell [x_k, x_{k+1}].

    Trapezoid in space for the mass difference between the two time levels,
    trapezoid in time (input state and prediction as the two samples) for the
    flux passing through each cell face. Zero exactly when the prediction
    satisfies the discrete integral balance.
    """
    u = u_n.values
    n = u.shape[1]
    if not (0 <= k < n - 1):
        raise UsageError(f"cell index {k} outside [0, {n - 1})")
    v = np.asarray(u_pred, dtype=float)
    Fu = flux_values(model, u[:, k : k + 2])
    Fv = flux_values(model, v[:, k : k + 2])
    mass_new = 0.5 * (v[:, k] + v[:, k + 1]) * dx
    mass_old = 0.5 * (u[:, k] + u[:, k + 1]) * dx
    influx = 0.5 * (Fu[:, 0] + Fv[:, 0]) * dt
    outflux = 0.5 * (Fu[:, 1] + Fv[:, 1]) * dt
    return mass_new - mass_old - influx + outflux


def _integral_residuals(
    model: ModelSpec, u: np.ndarray, v: np.ndarray, dx: float, dt: float
) -> tuple[np.ndarray, np.ndarray]:
    """All cell residuals (m, n-1) plus flux Jacobians at prediction nodes."""
    Fu = flux_values(model, u, check="none")
    Fv = flux_values(model, v, check="none")
    J = flux_jacobians(model, v, check="none")
    mass = 0.5 * dx * ((v[:, :-1] + v[:, 1:]) - (u[:, :-1] + u[:, 1:]))
    face = 0.5 * dt * (Fu + Fv)
    L = mass - face[:, :-1] + face[:, 1:]
    return L, J


def integral_loss(
    model: ModelSpec,
    grid: Grid1D,
    u_n: StateField,
    u_pred: np.ndarray,
    dt: float,
    dx_weighted: bool = False,
    boundary_weight: float = 1.0,
) -> LossValue:
    """Integral-form loss: sum over cells and components of the squared
    cell residual (raw sum by default), plus the endpoint Dirichlet penalty."""
    if dt <= 0:
        raise UsageError(f"dt must be positive, got {dt}")
    u_pred = np.asarray(u_pred, dtype=float)
    u = u_n.values
    if u_pred.shape != u.shape:
        raise UsageError(f"prediction shape {u_pred.shape} != state shape {u.shape}")
    dx = grid.dx
    L, J = _integral_residuals(model, u, u_pred, dx, dt)

    w = dx if dx_weighted else 1.0
    interior = w * float(np.sum(L * L))

    # cell k touches prediction nodes k (dl/dv_k = dx/2 I - dt/2 J_k)
    # and k+1 (dl/dv_{k+1} = dx/2 I + dt/2 J_{k+1})
    grad = np.zeros_like(u_pred)
    JT_L_left = np.einsum("kij,ik->jk", J[:-1], L)
    JT_L_right = np.einsum("kij,ik->jk", J[1:], L)
    grad[:, :-1] += w * (dx * L - dt * JT_L_left)
    grad[:, 1:] += w * (dx * L + dt * JT_L_right)

    boundary = _boundary_penalty(model, u_pred, u_n.time + dt, boundary_weight, grad)
    return LossValue(interior + boundary, interior, boundary, grad)


def evaluate_loss(
    form: LossForm,
    model: ModelSpec,
    grid: Grid1D,
    u_n: StateField,
    u_pred: np.ndarray,
    dt: float,
    dx_weighted: bool | None = None,
    boundary_weight: float = 1.0,
) -> LossValue:
    """Dispatch on the loss form, applying each form's default quadrature weight."""
    if form.kind is LossKind.DIFFERENTIAL:
        return differential_loss(
            model,
            grid,
            u_n,
            u_pred,
            dt,
            stencil=form.stencil,
            dx_weighted=True if dx_weighted is None else dx_weighted,
            boundary_weight=boundary_weight,
        )
    return integral_loss(
        model,
        grid,
        u_n,
        u_pred,
        dt,
        dx_weighted=False if dx_weighted is None else dx_weighted,
        boundary_weight=boundary_weight,
    )
