"""Uniform 1D mesh and the multi-component solution snapshot it carries.

Both types are immutable after construction; advancing the solution in time
means building a successor :class:`StateField`, never mutating one in place.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError, ModelError


@dataclass(frozen=True)
class Grid1D:
    """Uniform mesh on [x_min, x_max] with both endpoints included.

    Node i sits at ``x_min + i * dx`` with ``dx = (x_max - x_min) / (n_points - 1)``.
    """

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self) -> None:
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise ConfigurationError("grid bounds must be finite")
        if self.x_max <= self.x_min:
            raise ConfigurationError(
                f"x_max must exceed x_min, got [{self.x_min}, {self.x_max}]"
            )
        if self.n_points < 3:
            raise ConfigurationError(
                f"n_points must be at least 3, got {self.n_points}"
            )

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        """Node coordinates as a length-n_points array."""
        return self.x_min + self.dx * np.arange(self.n_points)


def make_grid(x_min: float, x_max: float, n_points: int) -> Grid1D:
    """Build a uniform grid, rejecting degenerate bounds or point counts."""
    return Grid1D(float(x_min), float(x_max), int(n_points))


def sample_function(grid: Grid1D, f: Callable[[float], float]) -> np.ndarray:
    """Evaluate a scalar function at every grid node.

    Raises :class:`ModelError` naming the offending coordinate if f produces
    a non-finite value anywhere on the grid.
    """
    x = grid.x
    values = np.fromiter((float(f(xi)) for xi in x), dtype=float, count=grid.n_points)
    bad = ~np.isfinite(values)
    if bad.any():
        i = int(np.argmax(bad))
        raise ModelError(f"function returned non-finite value {values[i]} at x={x[i]}")
    return values


@dataclass(frozen=True)
class StateField:
    """Solution values for all components on all grid nodes at one time level.

    ``values`` has shape (n_components, n_points) and is stored read-only;
    construction rejects non-finite entries outright.
    """

    grid: Grid1D
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[np.newaxis, :]
        if values.ndim != 2 or values.shape[1] != self.grid.n_points:
            raise ConfigurationError(
                f"state values must have shape (m, {self.grid.n_points}), "
                f"got {np.shape(self.values)}"
            )
        if not np.isfinite(values).all():
            raise ModelError("state field contains non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "time", float(self.time))

    @property
    def n_components(self) -> int:
        return self.values.shape[0]
