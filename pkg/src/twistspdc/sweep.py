"""Grid sweeps over ``(beta, t)`` written as deterministic CSV."""

from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .estimator import (
    DEFAULT_LENGTH_M,
    DEFAULT_SIGMA_M,
    DEFAULT_WAVELENGTH_M,
    SPDCEntanglementTransformer,
)
from .exceptions import InvalidParams
from .spdc import ROW_FIELDS

BOOL_FIELDS = ("npt_entangled", "mancini_violated")


class ConfigError(ValueError):
    """Sweep configuration could not be parsed."""


@dataclass(frozen=True)
class Grid:
    min: float
    max: float
    count: int

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.min)])
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class SweepSpec:
    wavelength_m: float = DEFAULT_WAVELENGTH_M
    sigma_m: float = DEFAULT_SIGMA_M
    crystal_length_m: float = DEFAULT_LENGTH_M
    curvature_inv_m: float = 0.0
    beta_grid: Grid = field(default_factory=lambda: Grid(0.01, 1.0, 200))
    twist_grid: Grid = field(default_factory=lambda: Grid(0.0, 1.0, 200))
    output_path: str = "sweep.csv"
    seed: int = 0

    def validate(self):
        for name in ("wavelength_m", "sigma_m", "crystal_length_m"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidParams(f"{name} must be positive, got {value}")
        if not math.isfinite(self.curvature_inv_m):
            raise InvalidParams("curvature_inv_m must be finite")
        b, t = self.beta_grid, self.twist_grid
        for label, grid in (("beta_grid", b), ("twist_grid", t)):
            if grid.count < 1:
                raise InvalidParams(f"{label}.count must be >= 1")
            if grid.min > grid.max:
                raise InvalidParams(f"{label}.min exceeds {label}.max")
        if not (0 < b.min and b.max <= 1):
            raise InvalidParams("beta_grid must lie within (0, 1]")
        if not (0 <= t.min and t.max <= 1):
            raise InvalidParams("twist_grid must lie within [0, 1]")
        return self

    def points(self) -> np.ndarray:
        """Row-major ``(beta, t)`` pairs: beta outer, t inner."""
        beta = self.beta_grid.values()
        t = self.twist_grid.values()
        return np.column_stack([np.repeat(beta, t.size), np.tile(t, beta.size)])

    def to_dict(self) -> dict:
        return asdict(self)


def _grid(raw, name) -> Grid:
    if not isinstance(raw, dict) or set(raw) != {"min", "max", "count"}:
        raise ConfigError(f"{name} must be an object with keys min, max, count")
    try:
        count = raw["count"]
        if isinstance(count, bool) or int(count) != count:
            raise ConfigError(f"{name}.count must be an integer")
        return Grid(float(raw["min"]), float(raw["max"]), int(count))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from None


def spec_from_dict(raw: dict) -> SweepSpec:
    """Build a SweepSpec from a parsed JSON object (unknown keys rejected)."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    known = set(SweepSpec.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    kwargs = {}
    for key, value in raw.items():
        if key in ("beta_grid", "twist_grid"):
            kwargs[key] = _grid(value, key)
        elif key == "output_path":
            if not isinstance(value, str):
                raise ConfigError("output_path must be a string")
            kwargs[key] = value
        elif key == "seed":
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError("seed must be an integer")
            kwargs[key] = value
        else:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{key} must be a number")
            kwargs[key] = float(value)
    return SweepSpec(**kwargs)


def load_spec(path) -> SweepSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return spec_from_dict(raw)


def run_sweep(spec: SweepSpec) -> dict:
    """Evaluate every grid point; returns column arrays in grid order."""
    spec.validate()
    model = SPDCEntanglementTransformer(
        wavelength_m=spec.wavelength_m,
        sigma_m=spec.sigma_m,
        crystal_length_m=spec.crystal_length_m,
        curvature_inv_m=spec.curvature_inv_m,
    )
    X = spec.points()
    return model.fit(X).evaluate(X)


def format_value(name, value) -> str:
    """CSV text for one field: 0/1 for flags, otherwise 9 significant digits."""
    if name in BOOL_FIELDS:
        return "1" if value else "0"
    value = float(value)
    if math.isinf(value):
        return "inf"
    return f"{value:.8e}"


def format_csv(columns: dict) -> str:
    buf = io.StringIO()
    buf.write(",".join(ROW_FIELDS) + "\n")
    n = len(columns["beta"])
    cols = [columns[name] for name in ROW_FIELDS]
    for i in range(n):
        buf.write(",".join(format_value(name, col[i]) for name, col in zip(ROW_FIELDS, cols)))
        buf.write("\n")
    return buf.getvalue()


def write_csv(columns: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(columns))
