"""Run configuration, trajectory/loss serialization, comparison metrics,
SVG plot emission, and the command-line interface.

Configuration documents are JSON with flat sections (model, grid, train,
reference, io) plus an optional "preset" key naming a built-in configuration
that the remaining keys override. Unknown keys are rejected with their full
key path. Trajectories serialize to CSV with 17 significant digits, so a
read/write round trip is bit-exact; Euler states are written as primitives
(rho, u, p) plus the conserved energy column E.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigurationError, UsageError
from .losses import LossForm, LossKind, Stencil
from .mesh import Grid1D, StateField, make_grid
from .models import GAMMA, ModelKind, ModelSpec, primitive_arrays, sod_model, wave_model
from .optim import OptimizerKind
from .reference import MusclConfig, muscl_solve, upwind_solve
from .trainer import ArchPreset, Architecture, TrainConfig, Trajectory, solve

_FMT = "%.17g"


# ---------------------------------------------------------------------------
# configuration documents


@dataclass(frozen=True)
class ModelSection:
    kind: str = "wave"  # "wave" | "sod"


@dataclass(frozen=True)
class GridSection:
    x_min: float = 0.0
    x_max: float = 1.0
    n_points: int = 101


@dataclass(frozen=True)
class TrainSection:
    dt: float = 0.01
    t_final: float = 1.0
    n_inner: int = 500
    loss: str = "integral"  # "integral" | "differential"
    stencil: str = "backward"  # "backward" | "forward"
    dx_weighted: bool | None = None  # None = each form's default
    boundary_weight: float = 1.0
    optimizer: str = "adaptive-moments"  # | "gradient-descent"
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon_hat: float = 1e-8
    architecture: str = "wave-3x100"
    hidden_units: tuple[int, ...] = ()
    multi: bool = False
    seed: int = 0
    snapshot_stride: int = 1


@dataclass(frozen=True)
class ReferenceSection:
    cfl: float = 0.4


@dataclass(frozen=True)
class IoSection:
    out_dir: str = "out"
    snapshot_times: tuple[float, ...] = ()


@dataclass(frozen=True)
class RunConfig:
    """Fully validated run description; every field has a recorded value."""

    model: ModelSection = ModelSection()
    grid: GridSection = GridSection()
    train: TrainSection = TrainSection()
    reference: ReferenceSection = ReferenceSection()
    io: IoSection = IoSection()
    preset: str | None = None


_SECTIONS = {
    "model": ModelSection,
    "grid": GridSection,
    "train": TrainSection,
    "reference": ReferenceSection,
    "io": IoSection,
}

PRESETS: dict[str, dict] = {
    "wave": {
        "model": {"kind": "wave"},
        "grid": {"x_min": 0.0, "x_max": 1.0, "n_points": 101},
        "train": {"dt": 0.01, "t_final": 1.0, "architecture": "wave-3x100"},
        "io": {"snapshot_times": [0.5, 1.0]},
    },
    "wave-100": {
        "model": {"kind": "wave"},
        "grid": {"x_min": 0.0, "x_max": 0.99, "n_points": 100},
        "train": {"dt": 0.01, "t_final": 1.0, "architecture": "wave-3x100"},
        "io": {"snapshot_times": [0.5, 1.0]},
    },
    "euler-single": {
        "model": {"kind": "sod"},
        "grid": {"x_min": 0.0, "x_max": 1.0, "n_points": 101},
        "train": {"dt": 0.0025, "t_final": 0.15, "architecture": "euler-single-330"},
        "io": {"snapshot_times": [0.075, 0.15]},
    },
    "euler-single-100": {
        "model": {"kind": "sod"},
        "grid": {"x_min": 0.0, "x_max": 0.99, "n_points": 100},
        "train": {"dt": 0.0025, "t_final": 0.15, "architecture": "euler-single-330"},
        "io": {"snapshot_times": [0.075, 0.15]},
    },
    "euler-multi": {
        "model": {"kind": "sod"},
        "grid": {"x_min": 0.0, "x_max": 1.0, "n_points": 101},
        "train": {"dt": 0.0025, "t_final": 0.15, "architecture": "euler-multi-1024"},
        "io": {"snapshot_times": [0.075, 0.15]},
    },
}

PRESET_ALIASES = {
    "wave-sec31": "wave",
    "euler-single-sec33": "euler-single",
}


def _resolve_preset(name: str) -> dict:
    key = PRESET_ALIASES.get(name, name)
    if key not in PRESETS:
        known = sorted(set(PRESETS) | set(PRESET_ALIASES))
        raise ConfigurationError(f"unknown preset {name!r}; known presets: {known}")
    return PRESETS[key]


def _coerce(section: str, key: str, value, target_type):
    path = f"{section}.{key}"
    if target_type is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if target_type is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"{path}: expected an integer, got {value!r}")
        return value
    if target_type is str:
        if not isinstance(value, str):
            raise ConfigurationError(f"{path}: expected a string, got {value!r}")
        return value
    if target_type == bool | None or target_type == "bool|None":
        if value is not None and not isinstance(value, bool):
            raise ConfigurationError(f"{path}: expected true/false/null, got {value!r}")
        return value
    if target_type is bool:
        if not isinstance(value, bool):
            raise ConfigurationError(f"{path}: expected true/false, got {value!r}")
        return value
    if target_type == tuple[float, ...]:
        if not isinstance(value, (list, tuple)) or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) for v in value
        ):
            raise ConfigurationError(f"{path}: expected a list of numbers, got {value!r}")
        return tuple(float(v) for v in value)
    if target_type == tuple[int, ...]:
        if not isinstance(value, (list, tuple)) or any(
            isinstance(v, bool) or not isinstance(v, int) for v in value
        ):
            raise ConfigurationError(f"{path}: expected a list of integers, got {value!r}")
        return tuple(int(v) for v in value)
    raise ConfigurationError(f"{path}: unsupported value {value!r}")


_FIELD_TYPES = {
    ("train", "dx_weighted"): "bool|None",
}


def _merge_section(name: str, cls, base: dict, override: dict) -> object:
    merged = dict(base)
    fields = {f.name: f for f in dataclasses.fields(cls)}
    for key, value in override.items():
        if key not in fields:
            raise ConfigurationError(
                f"unknown configuration key {name}.{key!r}; "
                f"known keys: {sorted(fields)}"
            )
        merged[key] = value
    kwargs = {}
    for key, value in merged.items():
        ftype = _FIELD_TYPES.get((name, key), fields[key].type)
        if isinstance(ftype, str) and ftype != "bool|None":
            ftype = {
                "float": float,
                "int": int,
                "str": str,
                "bool": bool,
                "tuple[float, ...]": tuple[float, ...],
                "tuple[int, ...]": tuple[int, ...],
                "bool | None": "bool|None",
            }[ftype]
        kwargs[key] = _coerce(name, key, value, ftype)
    return cls(**kwargs)


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a JSON configuration document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigurationError(
            f"malformed configuration document at line {err.lineno}, "
            f"column {err.colno}: {err.msg}"
        ) from err
    if not isinstance(doc, dict):
        raise ConfigurationError("configuration document must be a JSON object")
    if not doc:
        raise ConfigurationError(
            "empty configuration document; provide a 'preset' or sections "
            f"{sorted(_SECTIONS)}"
        )
    unknown = set(doc) - set(_SECTIONS) - {"preset"}
    if unknown:
        raise ConfigurationError(
            f"unknown top-level keys {sorted(unknown)}; "
            f"expected 'preset' and/or {sorted(_SECTIONS)}"
        )
    preset_name = doc.get("preset")
    base: dict = {}
    if preset_name is not None:
        if not isinstance(preset_name, str):
            raise ConfigurationError(f"preset: expected a string, got {preset_name!r}")
        base = _resolve_preset(preset_name)
    sections = {}
    for name, cls in _SECTIONS.items():
        override = doc.get(name, {})
        if not isinstance(override, dict):
            raise ConfigurationError(f"section {name!r} must be a JSON object")
        sections[name] = _merge_section(name, cls, base.get(name, {}), override)
    cfg = RunConfig(**sections, preset=preset_name)
    # force full validation of every child invariant before any computation
    build_model(cfg)
    build_grid(cfg)
    build_train_config(cfg)
    build_muscl_config(cfg)
    return cfg


def config_from_preset(name: str) -> RunConfig:
    return parse_config(json.dumps({"preset": name}))


def serialize_config(cfg: RunConfig) -> str:
    """Canonical JSON for a RunConfig; parse_config inverts it exactly."""
    doc = {name: dataclasses.asdict(getattr(cfg, name)) for name in _SECTIONS}
    for section in doc.values():
        for key, value in section.items():
            if isinstance(value, tuple):
                section[key] = list(value)
    if cfg.preset is not None:
        doc["preset"] = cfg.preset
    return json.dumps(doc, indent=2, sort_keys=True)


def build_model(cfg: RunConfig) -> ModelSpec:
    if cfg.model.kind == "wave":
        return wave_model()
    if cfg.model.kind == "sod":
        return sod_model()
    raise ConfigurationError(
        f"model.kind: expected 'wave' or 'sod', got {cfg.model.kind!r}"
    )


def build_grid(cfg: RunConfig) -> Grid1D:
    return make_grid(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n_points)


_ARCH_NAMES = {
    "wave-3x100": ArchPreset.WAVE_3X100,
    "euler-single-330": ArchPreset.EULER_SINGLE_330,
    "euler-multi-1024": ArchPreset.EULER_MULTI_1024,
    "custom": ArchPreset.CUSTOM,
}

_ENUM_CHOICES = {
    "train.loss": {"integral": LossKind.INTEGRAL, "differential": LossKind.DIFFERENTIAL},
    "train.stencil": {"backward": Stencil.BACKWARD, "forward": Stencil.FORWARD},
    "train.optimizer": {
        "adaptive-moments": OptimizerKind.ADAPTIVE_MOMENTS,
        "gradient-descent": OptimizerKind.GRADIENT_DESCENT,
    },
}


def _pick(path: str, value: str):
    choices = _ENUM_CHOICES[path]
    if value not in choices:
        raise ConfigurationError(
            f"{path}: expected one of {sorted(choices)}, got {value!r}"
        )
    return choices[value]


def build_train_config(cfg: RunConfig) -> TrainConfig:
    t = cfg.train
    if t.architecture not in _ARCH_NAMES:
        raise ConfigurationError(
            f"train.architecture: expected one of {sorted(_ARCH_NAMES)}, "
            f"got {t.architecture!r}"
        )
    arch = Architecture(
        preset=_ARCH_NAMES[t.architecture],
        hidden_units=t.hidden_units,
        multi=t.multi,
    )
    return TrainConfig(
        dt=t.dt,
        t_final=t.t_final,
        n_inner=t.n_inner,
        loss_form=LossForm(_pick("train.loss", t.loss), _pick("train.stencil", t.stencil)),
        optimizer_kind=_pick("train.optimizer", t.optimizer),
        learning_rate=t.learning_rate,
        beta1=t.beta1,
        beta2=t.beta2,
        epsilon_hat=t.epsilon_hat,
        architecture=arch,
        seed=t.seed,
        snapshot_stride=t.snapshot_stride,
        dx_weighted=t.dx_weighted,
        boundary_weight=t.boundary_weight,
    )


def build_muscl_config(cfg: RunConfig) -> MusclConfig:
    return MusclConfig(cfl=cfg.reference.cfl)


# ---------------------------------------------------------------------------
# trajectory tables and CSV


@dataclass(frozen=True)
class TrajectoryTable:
    """Column view of a trajectory: per-component arrays of shape (n_times, n)."""

    x: np.ndarray
    times: np.ndarray
    columns: dict[str, np.ndarray]

    @property
    def component_names(self) -> tuple[str, ...]:
        return tuple(self.columns)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    def row_at(self, component: str, t: float, tol: float = 1e-9) -> np.ndarray:
        if component not in self.columns:
            raise UsageError(
                f"unknown component {component!r}; have {list(self.columns)}"
            )
        hits = np.nonzero(np.abs(self.times - t) <= tol)[0]
        if hits.size == 0:
            raise UsageError(f"no snapshot at t={t}; have times {self.times.tolist()}")
        return self.columns[component][hits[0]]


def to_table(traj: Trajectory) -> TrajectoryTable:
    """Component columns for a trajectory: (u,) for scalar states,
    (rho, u, p, E) for Euler conserved states."""
    grid = traj.grid
    times = traj.times
    m = traj.snapshots[0].n_components
    if m == 1:
        cols = {"u": np.vstack([s.values[0] for s in traj.snapshots])}
    else:
        rho_rows, u_rows, p_rows, E_rows = [], [], [], []
        for s in traj.snapshots:
            # representation change, not a physics op: serialize the state as
            # it is, including any negative-pressure wiggles a run produced
            rho, u, p = primitive_arrays(s.values, check="none")
            rho_rows.append(rho)
            u_rows.append(u)
            p_rows.append(p)
            E_rows.append(s.values[2])
        cols = {
            "rho": np.vstack(rho_rows),
            "u": np.vstack(u_rows),
            "p": np.vstack(p_rows),
            "E": np.vstack(E_rows),
        }
    return TrajectoryTable(grid.x, times, cols)


def _as_table(traj) -> TrajectoryTable:
    return traj if isinstance(traj, TrajectoryTable) else to_table(traj)


def write_trajectory(traj, path) -> Path:
    """Write a trajectory (or table) as CSV: t, x, then one column per component."""
    table = _as_table(traj)
    path = Path(path)
    names = table.component_names
    lines = ["t,x," + ",".join(names)]
    for ti, t in enumerate(table.times):
        for xi, x in enumerate(table.x):
            vals = ",".join(_FMT % table.columns[c][ti, xi] for c in names)
            lines.append(f"{_FMT % t},{_FMT % x},{vals}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_trajectory(path) -> TrajectoryTable:
    """Read a trajectory CSV back into a table (bit-exact round trip)."""
    path = Path(path)
    lines = path.read_text().strip().splitlines()
    if not lines:
        raise UsageError(f"{path}: empty trajectory file")
    header = lines[0].split(",")
    if header[:2] != ["t", "x"] or len(header) < 3:
        raise UsageError(f"{path}: expected header 't,x,<components>', got {lines[0]!r}")
    names = header[2:]
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    if data.shape[1] != len(header):
        raise UsageError(f"{path}: inconsistent column count")
    t_col = data[:, 0]
    change = np.nonzero(np.diff(t_col))[0] + 1
    starts = np.concatenate([[0], change])
    n = starts[1] - starts[0] if starts.size > 1 else t_col.size
    times = t_col[starts]
    x = data[: int(n), 1]
    columns = {
        name: data[:, 2 + i].reshape(times.size, int(n))
        for i, name in enumerate(names)
    }
    return TrajectoryTable(x, times, columns)


def write_loss_history(reports, path) -> Path:
    """Loss-history CSV: step, iteration, interior, boundary, total."""
    path = Path(path)
    lines = ["step,iteration,interior,boundary,total"]
    for rep in reports:
        for it in range(rep.total.size):
            lines.append(
                f"{rep.step},{it + 1},{_FMT % rep.interior[it]},"
                f"{_FMT % rep.boundary[it]},{_FMT % rep.total[it]}"
            )
    path.write_text("\n".join(lines) + "\n")
    return path


# ---------------------------------------------------------------------------
# comparison


@dataclass(frozen=True)
class NormEntry:
    time: float
    component: str
    l1: float
    l2: float
    linf: float
    rel_l1: float | None
    rel_l2: float | None
    rel_linf: float | None


@dataclass(frozen=True)
class ComparisonReport:
    """Discrete norms of the difference between two trajectories at matched
    times; relative norms are normalized by the second (reference) trajectory
    and absent where the reference norm vanishes."""

    entries: tuple[NormEntry, ...]

    def entry(self, t: float, component: str, tol: float = 1e-9) -> NormEntry:
        for e in self.entries:
            if e.component == component and abs(e.time - t) <= tol:
                return e
        raise KeyError(f"no entry for component {component!r} at t={t}")

    def as_dict(self) -> list[dict]:
        return [dataclasses.asdict(e) for e in self.entries]


def compare(traj_a, traj_b, times) -> ComparisonReport:
    """Compare two trajectories on the same grid at the requested times.

    L1 = sum |d| dx, L2 = sqrt(sum d^2 dx), Linf = max |d|, computed per
    component over all grid nodes.
    """
    a = _as_table(traj_a)
    b = _as_table(traj_b)
    if a.x.shape != b.x.shape or not np.allclose(a.x, b.x, rtol=0.0, atol=1e-12):
        raise UsageError("trajectories live on different grids")
    shared = [c for c in a.component_names if c in b.columns]
    if not shared:
        raise UsageError(
            f"no shared components between {a.component_names} and {b.component_names}"
        )
    dx = a.dx
    entries = []
    for t in times:
        for comp in shared:
            da = a.row_at(comp, t)
            db = b.row_at(comp, t)
            d = da - db
            l1 = float(np.sum(np.abs(d)) * dx)
            l2 = float(np.sqrt(np.sum(d * d) * dx))
            linf = float(np.max(np.abs(d)))
            ref_l1 = float(np.sum(np.abs(db)) * dx)
            ref_l2 = float(np.sqrt(np.sum(db * db) * dx))
            ref_linf = float(np.max(np.abs(db)))
            entries.append(
                NormEntry(
                    time=float(t),
                    component=comp,
                    l1=l1,
                    l2=l2,
                    linf=linf,
                    rel_l1=l1 / ref_l1 if ref_l1 > 0 else None,
                    rel_l2=l2 / ref_l2 if ref_l2 > 0 else None,
                    rel_linf=linf / ref_linf if ref_linf > 0 else None,
                )
            )
    return ComparisonReport(tuple(entries))


# ---------------------------------------------------------------------------
# SVG plots


def _svg_path(xs: np.ndarray, ys: np.ndarray) -> str:
    pts = " ".join(f"{x:.3f},{y:.3f}" for x, y in zip(xs, ys))
    return f'<polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="{pts}"/>'


def emit_plot(traj, component: str, path) -> Path:
    """Render one line chart per snapshot time into a single SVG file.

    The output is plain hand-assembled SVG (no plotting backend), so identical
    input yields byte-identical files.
    """
    table = _as_table(traj)
    if table.times.size == 0:
        raise UsageError("cannot plot an empty trajectory")
    if component not in table.columns:
        raise UsageError(
            f"unknown component {component!r}; have {list(table.columns)}"
        )
    panel_w, panel_h, margin = 420.0, 180.0, 45.0
    n_panels = int(table.times.size)
    width = panel_w + 2 * margin
    height = n_panels * (panel_h + margin) + margin
    data = table.columns[component]
    y_min = float(np.min(data))
    y_max = float(np.max(data))
    if y_max - y_min < 1e-12:
        y_min, y_max = y_min - 0.5, y_max + 0.5
    x_min, x_max = float(table.x[0]), float(table.x[-1])

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>',
    ]
    for k, t in enumerate(table.times):
        top = margin + k * (panel_h + margin)
        xs = margin + (table.x - x_min) / (x_max - x_min) * panel_w
        ys = top + panel_h - (data[k] - y_min) / (y_max - y_min) * panel_h
        parts.append(
            f'<rect x="{margin:.1f}" y="{top:.1f}" width="{panel_w:.1f}" '
            f'height="{panel_h:.1f}" fill="none" stroke="#888" stroke-width="1"/>'
        )
        parts.append(_svg_path(xs, ys))
        parts.append(
            f'<text x="{margin:.1f}" y="{top - 6:.1f}" font-size="12" '
            f'font-family="sans-serif">{component} at t={t:.6g}</text>'
        )
        parts.append(
            f'<text x="{margin - 6:.1f}" y="{top + panel_h:.1f}" font-size="10" '
            f'text-anchor="end" font-family="sans-serif">{y_min:.4g}</text>'
        )
        parts.append(
            f'<text x="{margin - 6:.1f}" y="{top + 10:.1f}" font-size="10" '
            f'text-anchor="end" font-family="sans-serif">{y_max:.4g}</text>'
        )
        parts.append(
            f'<text x="{margin:.1f}" y="{top + panel_h + 14:.1f}" font-size="10" '
            f'font-family="sans-serif">x={x_min:.4g}</text>'
        )
        parts.append(
            f'<text x="{margin + panel_w:.1f}" y="{top + panel_h + 14:.1f}" '
            f'font-size="10" text-anchor="end" font-family="sans-serif">x={x_max:.4g}</text>'
        )
    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts) + "\n")
    return path


# ---------------------------------------------------------------------------
# run drivers and metadata


def collect_metadata(cfg: RunConfig, **extras) -> dict:
    """Everything needed to reproduce a run: effective config plus the
    package's declared modeling conventions."""
    meta = {
        "fluxstep_version": __version__,
        "config": json.loads(serialize_config(cfg)),
        "conventions": {
            "gamma": GAMMA,
            "equation_of_state": (
                "p = rho*T with E = rho*u^2/2 + rho*T, i.e. gamma = 2 "
                "(differs from air, gamma = 1.4); sound speed sqrt(2*p/rho)"
            ),
            "grid": "nodes at x_min + i*dx, both endpoints included",
            "sod_discontinuity": "the node at exactly x = 0.5 takes the right state",
            "recorded_state": "network output at the post-update evaluation",
            "boundary_penalty": "applied to the prediction at time t + dt",
        },
    }
    meta.update(extras)
    return meta


def write_metadata(meta: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj)}")


def run_solve(cfg: RunConfig, out_dir=None, log=None) -> dict:
    """Neural run: solve, then write trajectory, loss history, and metadata."""
    out = Path(out_dir if out_dir is not None else cfg.io.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model = build_model(cfg)
    grid = build_grid(cfg)
    tc = build_train_config(cfg)
    traj = solve(model, grid, tc, log=log)
    paths = {
        "trajectory": write_trajectory(traj, out / "trajectory.csv"),
        "loss_history": write_loss_history(traj.reports, out / "loss_history.csv"),
        "metadata": write_metadata(
            collect_metadata(cfg, run="solve", n_steps=len(traj.reports)),
            out / "metadata.json",
        ),
    }
    return {"trajectory": traj, "paths": paths}


def run_reference(cfg: RunConfig, scheme: str, out_dir=None) -> dict:
    """Classical run (muscl or upwind) with the same outputs as run_solve."""
    out = Path(out_dir if out_dir is not None else cfg.io.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model = build_model(cfg)
    grid = build_grid(cfg)
    if scheme == "muscl":
        traj = muscl_solve(
            model,
            grid,
            cfg.train.t_final,
            build_muscl_config(cfg),
            snapshot_times=cfg.io.snapshot_times,
        )
        extras = {"run": "reference-muscl", "conservation": traj.conservation}
    elif scheme == "upwind":
        traj = upwind_solve(
            model, grid, cfg.train.dt, cfg.train.t_final, cfg.train.snapshot_stride
        )
        extras = {"run": "reference-upwind"}
    else:
        raise ConfigurationError(f"unknown reference scheme {scheme!r}")
    paths = {
        "trajectory": write_trajectory(traj, out / f"reference_{scheme}.csv"),
        "metadata": write_metadata(collect_metadata(cfg, **extras), out / "metadata.json"),
    }
    return {"trajectory": traj, "paths": paths}


# ---------------------------------------------------------------------------
# command line


def _apply_overrides(doc: dict, sets: list[str]) -> dict:
    for item in sets:
        if "=" not in item:
            raise ConfigurationError(f"--set expects section.key=value, got {item!r}")
        target, raw = item.split("=", 1)
        if "." not in target:
            raise ConfigurationError(f"--set expects section.key=value, got {item!r}")
        section, key = target.split(".", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        doc.setdefault(section, {})[key] = value
    return doc


def _load_config(args) -> RunConfig:
    if args.config is not None:
        doc = json.loads(Path(args.config).read_text())
        if not isinstance(doc, dict):
            raise ConfigurationError("configuration document must be a JSON object")
    elif args.preset is not None:
        doc = {"preset": args.preset}
    else:
        raise ConfigurationError("provide --config FILE or --preset NAME")
    doc = _apply_overrides(doc, args.set or [])
    if args.seed is not None:
        doc.setdefault("train", {})["seed"] = args.seed
    if args.out_dir is not None:
        doc.setdefault("io", {})["out_dir"] = args.out_dir
    return parse_config(json.dumps(doc))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluxstep",
        description=(
            "Neural time stepping for 1D conservation laws, with classical "
            "reference solvers and trajectory comparison."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--preset", help=f"built-in preset: {sorted(set(PRESETS) | set(PRESET_ALIASES))}")
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                       help="override any config key (repeatable)")
        p.add_argument("--seed", type=int, help="override train.seed")
        p.add_argument("--out-dir", help="override io.out_dir")

    p_solve = sub.add_parser("solve", help="train the neural stepper and write its trajectory")
    add_run_flags(p_solve)
    p_solve.add_argument("--quiet", action="store_true", help="suppress progress lines")

    p_ref = sub.add_parser("reference", help="run a classical solver on the same configuration")
    add_run_flags(p_ref)
    p_ref.add_argument("--scheme", choices=["muscl", "upwind"], default="muscl")

    p_cmp = sub.add_parser("compare", help="discrete norms between two trajectory CSVs")
    p_cmp.add_argument("traj_a")
    p_cmp.add_argument("traj_b", help="reference trajectory (normalizes relative norms)")
    p_cmp.add_argument("--times", required=True, help="comma-separated times, e.g. 0.075,0.15")
    p_cmp.add_argument("--json", dest="json_out", help="also write the report as JSON")

    p_plot = sub.add_parser("plot", help="render a trajectory CSV to SVG")
    p_plot.add_argument("trajectory")
    p_plot.add_argument("--component", required=True)
    p_plot.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            cfg = _load_config(args)
            log = None if args.quiet else print
            result = run_solve(cfg, log=log)
            print(f"wrote {result['paths']['trajectory']}")
        elif args.command == "reference":
            cfg = _load_config(args)
            result = run_reference(cfg, args.scheme)
            print(f"wrote {result['paths']['trajectory']}")
        elif args.command == "compare":
            times = [float(v) for v in args.times.split(",") if v]
            report = compare(
                read_trajectory(args.traj_a), read_trajectory(args.traj_b), times
            )
            for e in report.entries:
                rel = "" if e.rel_l1 is None else f"  relL1={e.rel_l1:.6g}"
                print(
                    f"t={e.time:<10.6g} {e.component:<4} L1={e.l1:.6g} "
                    f"L2={e.l2:.6g} Linf={e.linf:.6g}{rel}"
                )
            if args.json_out:
                Path(args.json_out).write_text(json.dumps(report.as_dict(), indent=2) + "\n")
        elif args.command == "plot":
            out = emit_plot(read_trajectory(args.trajectory), args.component, args.out)
            print(f"wrote {out}")
        return 0
    except (ConfigurationError, UsageError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
