"""Data-free neural time stepping for 1D conservation laws.

A small dense network is retrained at every time step to map the solution
at t to the solution at t + dt by minimizing a residual of the conservation
law, in differential or integral form; no solution data is ever required
beyond the initial and boundary conditions. Classical solvers (analytic
wave transport, first-order upwind, second-order MUSCL finite volume) and a
trajectory comparison harness are bundled for validation.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    FluxstepError,
    ModelError,
    NumericalError,
    StateValidityError,
    TrainingError,
    UsageError,
)
from .mesh import Grid1D, StateField, make_grid, sample_function
from .models import (
    GAMMA,
    BoundaryKind,
    EulerConserved,
    EulerPrimitive,
    ModelKind,
    ModelSpec,
    Side,
    boundary_value,
    conserved_to_primitive,
    flux,
    flux_jacobians,
    flux_values,
    primitive_to_conserved,
    sod_model,
    wave_model,
    with_zero_flux,
)
from .network import (
    Activation,
    Conv1DKernel,
    DenseLayer,
    ForwardCache,
    Network,
    Padding,
    backward,
    conv1d,
    forward,
    init_identity,
)
from .losses import (
    LossForm,
    LossKind,
    LossValue,
    Stencil,
    differential_loss,
    evaluate_loss,
    integral_cell_residual,
    integral_loss,
    trapezoid_space,
    trapezoid_time,
)
from .optim import (
    OptimizerKind,
    OptimizerState,
    adaptive_moments,
    apply_gradients,
    gradient_descent,
)
from .trainer import (
    Architecture,
    ArchPreset,
    LossReport,
    TrainConfig,
    Trajectory,
    advance_one_step,
    build_network,
    initial_state,
    solve,
)
from .reference import (
    MusclConfig,
    analytic_wave,
    minmod,
    muscl_solve,
    muscl_step,
    upwind_solve,
    upwind_step,
)
from .cli_io import (
    ComparisonReport,
    RunConfig,
    TrajectoryTable,
    compare,
    config_from_preset,
    emit_plot,
    parse_config,
    read_trajectory,
    run_reference,
    run_solve,
    serialize_config,
    to_table,
    write_loss_history,
    write_trajectory,
)

__all__ = [
    "__version__",
    # errors
    "FluxstepError", "ConfigurationError", "UsageError", "ModelError",
    "StateValidityError", "NumericalError", "TrainingError",
    # mesh
    "Grid1D", "StateField", "make_grid", "sample_function",
    # models
    "GAMMA", "ModelKind", "BoundaryKind", "Side", "ModelSpec",
    "EulerPrimitive", "EulerConserved", "conserved_to_primitive",
    "primitive_to_conserved", "flux", "flux_values", "flux_jacobians",
    "boundary_value", "wave_model", "sod_model", "with_zero_flux",
    # network
    "Activation", "Padding", "DenseLayer", "Network", "ForwardCache",
    "Conv1DKernel", "init_identity", "forward", "backward", "conv1d",
    # losses
    "LossKind", "Stencil", "LossForm", "LossValue", "differential_loss",
    "integral_loss", "integral_cell_residual", "evaluate_loss",
    "trapezoid_time", "trapezoid_space",
    # optimizer
    "OptimizerKind", "OptimizerState", "gradient_descent", "adaptive_moments",
    "apply_gradients",
    # trainer
    "ArchPreset", "Architecture", "TrainConfig", "LossReport", "Trajectory",
    "build_network", "initial_state", "advance_one_step", "solve",
    # reference
    "analytic_wave", "upwind_step", "upwind_solve", "minmod", "MusclConfig",
    "muscl_step", "muscl_solve",
    # io / cli
    "RunConfig", "parse_config", "serialize_config", "config_from_preset",
    "TrajectoryTable", "to_table", "write_trajectory", "read_trajectory",
    "write_loss_history", "compare", "ComparisonReport", "emit_plot",
    "run_solve", "run_reference",
]
