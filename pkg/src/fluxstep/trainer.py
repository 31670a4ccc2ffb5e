"""Recurrent training loop: one small optimization per time step.

The network maps the flattened current state (all components, all nodes) to
the state one time step later. Each outer step runs n_inner iterations of
forward -> loss -> backward -> update against the residual loss, then the
freshly updated network's output becomes the recorded solution at the new
time. The same network is carried from step to step (warm start); identity
initialization makes it the exact identity map at t = 0, which is already
the loss minimizer for a steady state.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError, StateValidityError, TrainingError
from .losses import LossForm, LossKind, LossValue, evaluate_loss
from .mesh import Grid1D, StateField, sample_function
from .models import ModelSpec
from .network import Activation, Network, backward, forward, init_identity
from .optim import OptimizerKind, OptimizerState, apply_gradients


class ArchPreset(enum.Enum):
    WAVE_3X100 = "wave-3x100"
    EULER_SINGLE_330 = "euler-single-330"
    EULER_MULTI_1024 = "euler-multi-1024"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Architecture:
    """Network shape selector.

    Preset hidden widths are nominal: they grow to the input width when the
    grid demands it, so identity initialization always reproduces the input
    exactly. CUSTOM takes explicit hidden widths and a single/multi flag.
    """

    preset: ArchPreset
    hidden_units: tuple[int, ...] = ()
    multi: bool = False


@dataclass(frozen=True)
class TrainConfig:
    """Everything one neural run needs besides the model and the grid."""

    dt: float
    t_final: float
    n_inner: int = 500
    loss_form: LossForm = LossForm(LossKind.INTEGRAL)
    optimizer_kind: OptimizerKind = OptimizerKind.ADAPTIVE_MOMENTS
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon_hat: float = 1e-8
    architecture: Architecture = Architecture(ArchPreset.WAVE_3X100)
    seed: int = 0
    snapshot_stride: int = 1
    dx_weighted: bool | None = None
    boundary_weight: float = 1.0

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if self.t_final < 0:
            raise ConfigurationError(f"t_final must be nonnegative, got {self.t_final}")
        if self.n_inner < 1:
            raise ConfigurationError(f"n_inner must be at least 1, got {self.n_inner}")
        if self.snapshot_stride < 1:
            raise ConfigurationError("snapshot_stride must be at least 1")


@dataclass(frozen=True)
class LossReport:
    """Loss breakdown for every inner iteration of one outer step."""

    step: int
    time: float
    interior: np.ndarray
    boundary: np.ndarray
    total: np.ndarray

    @property
    def first_loss(self) -> float:
        return float(self.total[0])

    @property
    def last_loss(self) -> float:
        return float(self.total[-1])


@dataclass(frozen=True)
class Trajectory:
    """Sequence of solution snapshots with (for neural runs) loss reports."""

    snapshots: tuple[StateField, ...]
    reports: tuple[LossReport, ...] = ()
    conservation: dict | None = None

    def __post_init__(self) -> None:
        times = [s.time for s in self.snapshots]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigurationError("snapshot times must be strictly increasing")

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    @property
    def grid(self) -> Grid1D:
        return self.snapshots[0].grid

    def at_time(self, t: float, tol: float = 1e-9) -> StateField:
        for snap in self.snapshots:
            if abs(snap.time - t) <= tol:
                return snap
        raise KeyError(f"no snapshot at t={t} (have {[s.time for s in self.snapshots]})")


def _identity_stack(dims: list[int], offsets: list[int] | None = None) -> tuple:
    offsets = offsets or [0] * (len(dims) - 1)
    layers = []
    for k in range(len(dims) - 1):
        act = Activation.LINEAR if k == len(dims) - 2 else Activation.RELU
        layers.append(init_identity(dims[k], dims[k + 1], act, offsets[k]))
    return tuple(layers)


def build_network(arch: Architecture, model: ModelSpec, grid: Grid1D) -> Network:
    """Identity-initialized network for a model/grid pair.

    Single-network shapes map the full flattened state to itself; the
    multi-network shape holds one stack per component, each consuming the
    full state and emitting its own component (the output layer's identity
    block is shifted to that component's slice).
    """
    m = model.n_components
    width_in = m * grid.n_points
    n = grid.n_points
    if arch.preset is ArchPreset.WAVE_3X100:
        h = max(100, width_in)
        return Network.single(_identity_stack([width_in, h, h, width_in]))
    if arch.preset is ArchPreset.EULER_SINGLE_330:
        h = max(330, width_in)
        return Network.single(_identity_stack([width_in, h, width_in]))
    if arch.preset is ArchPreset.EULER_MULTI_1024:
        h = max(1024, width_in)
        stacks = [
            _identity_stack([width_in, h, n], offsets=[0, c * n]) for c in range(m)
        ]
        return Network.multi(stacks)
    if not arch.hidden_units:
        raise ConfigurationError("custom architecture requires explicit hidden_units")
    if arch.multi:
        stacks = [
            _identity_stack(
                [width_in, *arch.hidden_units, n],
                offsets=[0] * len(arch.hidden_units) + [c * n],
            )
            for c in range(m)
        ]
        return Network.multi(stacks)
    return Network.single(_identity_stack([width_in, *arch.hidden_units, width_in]))


def _make_optimizer(config: TrainConfig) -> OptimizerState:
    return OptimizerState(
        kind=config.optimizer_kind,
        learning_rate=config.learning_rate,
        beta1=config.beta1,
        beta2=config.beta2,
        epsilon_hat=config.epsilon_hat,
    )


def advance_one_step(
    net: Network,
    I: StateField,
    config: TrainConfig,
    model: ModelSpec,
) -> tuple[StateField, Network, LossReport]:
    """Train for one time step and return the advanced state.

    Runs n_inner iterations of forward/loss/backward/update with a fresh
    optimizer, then evaluates the updated network once more; that final
    output is the solution at time I.time + dt.
    """
    grid = I.grid
    m, n = I.values.shape
    if net.in_dim != m * n:
        raise ConfigurationError(
            f"network input width {net.in_dim} does not match state size {m * n}"
        )
    x = I.values.ravel()
    opt = _make_optimizer(config)
    interior = np.empty(config.n_inner)
    bound = np.empty(config.n_inner)
    total = np.empty(config.n_inner)
    for it in range(config.n_inner):
        y, cache = forward(net, x)
        pred = y.reshape(m, n)
        try:
            lv: LossValue = evaluate_loss(
                config.loss_form,
                model,
                grid,
                I,
                pred,
                config.dt,
                dx_weighted=config.dx_weighted,
                boundary_weight=config.boundary_weight,
            )
        except (StateValidityError, ArithmeticError) as err:
            raise TrainingError(
                f"loss evaluation broke down at inner iteration {it + 1}: {err}"
            ) from err
        if not np.isfinite(lv.total):
            raise TrainingError(f"non-finite loss at inner iteration {it + 1}")
        grads, _ = backward(net, cache, lv.grad_wrt_prediction.ravel())
        net, opt = apply_gradients(net, grads, opt)
        interior[it] = lv.interior
        bound[it] = lv.boundary
        total[it] = lv.total
    y_final, _ = forward(net, x)
    step_index = int(round(I.time / config.dt)) + 1
    new_time = I.time + config.dt
    I_new = StateField(grid, y_final.reshape(m, n), time=new_time)
    report = LossReport(step_index, new_time, interior, bound, total)
    return I_new, net, report


def initial_state(model: ModelSpec, grid: Grid1D) -> StateField:
    """Sample the model's initial condition on the grid at t = 0."""
    rows = [sample_function(grid, ic) for ic in model.initial_condition]
    return StateField(grid, np.vstack(rows), time=0.0)


def solve(
    model: ModelSpec,
    grid: Grid1D,
    config: TrainConfig,
    log: Callable[[str], None] | None = None,
) -> Trajectory:
    """Run the outer time loop from t = 0 to t_final.

    Snapshots are recorded at t = 0 and every snapshot_stride-th step. The
    step count is round(t_final / dt) up to half-step round-off, so a horizon
    that is an exact multiple of dt lands exactly.
    """
    n_steps = max(0, int(np.ceil(config.t_final / config.dt - 0.5)))
    net = build_network(config.architecture, model, grid)
    state = initial_state(model, grid)
    snapshots = [state]
    reports = []
    for k in range(1, n_steps + 1):
        try:
            state, net, report = advance_one_step(net, state, config, model)
        except TrainingError as err:
            raise TrainingError(f"outer step {k} failed: {err}") from err
        state = StateField(state.grid, state.values, time=k * config.dt)
        reports.append(report)
        if k % config.snapshot_stride == 0:
            snapshots.append(state)
        if log is not None:
            log(
                f"step {k:4d}  t={state.time:.6g}  "
                f"loss {report.first_loss:.6e} -> {report.last_loss:.6e}"
            )
    return Trajectory(tuple(snapshots), tuple(reports))
