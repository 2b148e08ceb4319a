"""Declarative scenario configuration.

Scenarios are TOML (or the JSON sidecar written by a previous run). Unknown keys
are rejected everywhere: a misspelled physics parameter must never fall back to
a default silently.

Example::

    name = "demo"
    pipeline = "closed"          # analytic | closed | open | compare

    [params]
    gamma = 0.0

    [initial]
    kind = "coherent"
    alpha = 2.0
    beta_mag = 1.0
    phi = 0.0

    [grid]
    t_max = 0.3
    n_points = 300

    [hilbert]
    dim_a = 20
    dim_c = 20

    [[sweep]]
    label = "phi_pi"
    set = { "initial.phi" = 3.141592653589793 }
"""
from __future__ import annotations

import copy
import json
import sys
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError
from .fock import HilbertConfig
from .params import CDS_CHI, CDS_OMEGA1, CDS_OMEGA2, InitialAmplitudes, SystemParams
from .series import TimeGrid

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ParamsModel(_Strict):
    omega1: float = CDS_OMEGA1
    omega2: float = CDS_OMEGA2
    chi: float = Field(CDS_CHI, ge=0)
    g: float = 1.0
    gamma: float = Field(0.0, ge=0)
    n_th: float = Field(0.0, ge=0)

    def build(self) -> SystemParams:
        return SystemParams(**self.model_dump())


class CoherentInit(_Strict):
    kind: Literal["coherent"] = "coherent"
    alpha: float = 2.0
    beta_mag: float = Field(1.0, ge=0)
    phi: float = 0.0

    def amplitudes(self) -> InitialAmplitudes:
        return InitialAmplitudes(self.alpha, self.beta_mag, self.phi)


class FockInit(_Strict):
    kind: Literal["fock"]
    n_a: int = Field(ge=0)
    n_c: int = Field(ge=0)


InitialModel = Annotated[Union[CoherentInit, FockInit], Field(discriminator="kind")]


class GridModel(_Strict):
    t_max: float = Field(0.3, gt=0)
    n_points: int = Field(300, ge=2)

    def build(self) -> TimeGrid:
        return TimeGrid.uniform(self.t_max, self.n_points)


class HilbertModel(_Strict):
    dim_a: int = Field(20, ge=2)
    dim_c: int = Field(20, ge=2)

    def build(self) -> HilbertConfig:
        return HilbertConfig(self.dim_a, self.dim_c)


class IntegratorModel(_Strict):
    max_step: float = Field(4e-3, gt=0)


class OutputModel(_Strict):
    dir: str = "."
    format: Literal["csv"] = "csv"


class SweepEntry(_Strict):
    label: str = Field(pattern=r"^[A-Za-z0-9_.-]+$")
    set: dict[str, Union[float, int]]


class ScenarioConfig(_Strict):
    name: str = Field(pattern=r"^[A-Za-z0-9_.-]+$")
    pipeline: Literal["analytic", "closed", "open", "compare"] = "closed"
    params: ParamsModel = ParamsModel()
    initial: InitialModel = CoherentInit()
    grid: GridModel = GridModel()
    hilbert: HilbertModel = HilbertModel()
    integrator: IntegratorModel = IntegratorModel()
    output: OutputModel = OutputModel()
    sweep: list[SweepEntry] = []
    notes: list[str] = []

    @model_validator(mode="after")
    def _pipeline_needs(self):
        if self.pipeline in ("analytic", "compare") and self.initial.kind != "coherent":
            raise ValueError(f"pipeline {self.pipeline!r} requires a coherent initial state")
        if self.pipeline == "open" and "gamma" not in self.params.model_fields_set:
            raise ValueError("pipeline 'open' requires params.gamma to be given explicitly")
        labels = [s.label for s in self.sweep]
        if len(set(labels)) != len(labels):
            raise ValueError("sweep labels must be unique")
        return self

    def jobs(self) -> list["ScenarioConfig"]:
        """Expand the sweep into independent single-run configs named ``<name>_<label>``."""
        if not self.sweep:
            return [self]
        base = self.model_dump(exclude={"sweep"}, exclude_unset=True)
        out = []
        for entry in self.sweep:
            data = copy.deepcopy(base)
            for dotted, value in entry.set.items():
                _assign(data, dotted, value)
            data["name"] = f"{self.name}_{entry.label}"
            out.append(validate_config(data))
        return out

    def to_json_dict(self) -> dict:
        return self.model_dump(mode="json")


def _assign(data: dict, dotted: str, value):
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"sweep key {dotted!r} does not name a table field")
    node[keys[-1]] = value


def validate_config(data: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ScenarioConfig:
    """Read a scenario from ``.toml`` or ``.json`` (a run sidecar is accepted too)."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        if path.suffix == ".json":
            data = json.loads(raw)
            # a meta sidecar nests the resolved config under "config"
            if isinstance(data, dict) and "config" in data and "name" not in data:
                data = data["config"]
        else:
            data = tomllib.loads(raw.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a table")
    return validate_config(data)
