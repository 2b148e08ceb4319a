"""Time grids and tabular witness series shared by the analytic and numeric paths."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping

import numpy as np

Source = Literal["analytic", "numeric-closed", "numeric-open"]

# Deterministic column order for every table written to disk.
WITNESS_COLUMNS = (
    "N_a",
    "N_c",
    "varX_a",
    "varY_a",
    "varX_c",
    "varY_c",
    "varX_ac",
    "varY_ac",
    "D_a",
    "D_c",
    "D_ac",
    "g2_a",
    "g2_c",
    "HZ1",
    "HZ2",
    "Duan",
    "S_a_to_c",
    "S_c_to_a",
)

VARIANCE_COLUMNS = ("varX_a", "varY_a", "varX_c", "varY_c", "varX_ac", "varY_ac")


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing times in units of 1/g, starting at 0."""

    points: np.ndarray

    def __post_init__(self):
        p = np.array(self.points, dtype=float).ravel()
        if p.size < 2:
            raise ValueError("a time grid needs at least two points")
        if p[0] != 0.0:
            raise ValueError(f"time grid must start at 0, got {p[0]}")
        if not np.all(np.isfinite(p)) or np.any(np.diff(p) <= 0):
            raise ValueError("time grid must be finite and strictly increasing")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    @classmethod
    def uniform(cls, t_max: float, n_points: int) -> "TimeGrid":
        if n_points < 2:
            raise ValueError("n_points must be >= 2")
        if not t_max > 0:
            raise ValueError("t_max must be > 0")
        return cls(np.linspace(0.0, t_max, n_points))

    def __len__(self):
        return self.points.size

    def __iter__(self):
        return iter(self.points)


@dataclass(frozen=True, eq=False)
class WitnessSeries:
    """Named real columns sampled on a time grid, tagged with how they were produced."""

    grid: TimeGrid
    columns: Mapping[str, np.ndarray]
    source: Source
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        cols = {}
        n = len(self.grid)
        for name, values in self.columns.items():
            v = np.array(values)
            if np.iscomplexobj(v):
                if v.size and np.max(np.abs(v.imag)) > 1e-10:
                    raise ValueError(f"column {name!r} has imaginary residue {np.max(np.abs(v.imag)):.2e}")
                v = v.real
            v = v.astype(float)
            if v.shape != (n,):
                raise ValueError(f"column {name!r} has shape {v.shape}, grid has {n} points")
            v.setflags(write=False)
            cols[name] = v
        for name in VARIANCE_COLUMNS:
            if name in cols and self.source != "analytic" and np.any(cols[name] <= 0):
                raise ValueError(f"variance column {name!r} is not strictly positive")
        object.__setattr__(self, "columns", cols)

    @property
    def t(self) -> np.ndarray:
        return self.grid.points

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __contains__(self, name: str) -> bool:
        return name in self.columns

    def column_names(self) -> list[str]:
        ordered = [c for c in WITNESS_COLUMNS if c in self.columns]
        return ordered + sorted(c for c in self.columns if c not in WITNESS_COLUMNS)

    def select(self, names: Iterable[str]) -> "WitnessSeries":
        return WitnessSeries(self.grid, {n: self.columns[n] for n in names}, self.source, dict(self.meta))

    def window(self, t_max: float) -> "WitnessSeries":
        """Rows with t <= t_max (plus a tiny tolerance for grid round-off)."""
        mask = self.t <= t_max * (1 + 1e-12)
        grid = TimeGrid(self.t[mask])
        return WitnessSeries(grid, {k: v[mask] for k, v in self.columns.items()}, self.source, dict(self.meta))
