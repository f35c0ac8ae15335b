"""JSON run configuration.

A run file has five optional sections; anything omitted takes the default
below.  Example::

    {
      "seed": 0,
      "data": {"task": "shifted-xor", "n": 5760, "feature_dim": 32},
      "edge_model": {"kind": "linear", "epochs": 5, "lr": 0.05},
      "cloud_model": {"kind": "mlp", "hidden_dim": 16, "epochs": 600, "lr": 1.0},
      "simulation": {"tau": 0.2, "rounds": 60, "paradigm": "c3ekd"},
      "link": {"image_size_bits": 240000}
    }

Image sizes are in bits with 1 kB = 1000 bytes, so 30 kB = 240000 bits.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigurationError
from .models import ClassifierSpec
from .network import LinkConfig
from .protocol import Paradigm, SimulationConfig


@dataclass(frozen=True)
class DataConfig:
    task: str = "shifted-xor"
    n: int = 5760
    feature_dim: int = 32
    sigma: float = 0.35
    minor_fraction: float = 0.05
    minor_offset: float = 1.0
    fractions: tuple[float, float, float] = (0.4, 0.5, 0.1)
    csv: str | None = None


@dataclass(frozen=True)
class ModelConfig:
    kind: str = "linear"
    hidden_dim: int = 0
    activation: str = "relu"
    # the edge model is deliberately given a short training budget
    epochs: int = 5
    lr: float = 0.05
    init_scale: float = 0.1

    def spec(self, input_dim: int) -> ClassifierSpec:
        return ClassifierSpec(self.kind, input_dim, self.hidden_dim, self.activation)


DEFAULT_EDGE = ModelConfig()
DEFAULT_CLOUD = ModelConfig(kind="mlp", hidden_dim=16, activation="relu", epochs=600, lr=1.0)


@dataclass(frozen=True)
class OutputConfig:
    checkpoint_every: int = 0
    checkpoint_format: str = "json"


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    data: DataConfig = field(default_factory=DataConfig)
    edge_model: ModelConfig = DEFAULT_EDGE
    cloud_model: ModelConfig = DEFAULT_CLOUD
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    link: LinkConfig = field(default_factory=LinkConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["simulation"]["paradigm"] = self.simulation.paradigm.value
        d["simulation"]["cameras_per_school"] = list(self.simulation.cameras_per_school)
        d["data"]["fractions"] = list(self.data.fractions)
        return d


def _build(cls, raw: dict | None, base=None):
    raw = dict(raw or {})
    base = base if base is not None else cls()
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(raw) - names
    if unknown:
        raise ConfigurationError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    for key in ("fractions", "cameras_per_school"):
        if key in raw:
            raw[key] = tuple(raw[key])
    try:
        return dataclasses.replace(base, **raw)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{cls.__name__}: {exc}") from exc


def from_dict(raw: dict) -> RunConfig:
    known = {"seed", "data", "edge_model", "cloud_model", "simulation", "link", "output"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigurationError(f"unknown top-level config keys: {sorted(unknown)}")
    seed = int(raw.get("seed", 0))
    sim_raw = dict(raw.get("simulation") or {})
    sim_raw.setdefault("seed", seed)
    if isinstance(sim_raw.get("schools"), int):
        # one camera per school unless the layout is given
        sim_raw.setdefault("cameras_per_school", [1] * sim_raw["schools"])
    sim = _build(SimulationConfig, sim_raw)
    return RunConfig(
        seed=seed,
        data=_build(DataConfig, raw.get("data")),
        edge_model=_build(ModelConfig, raw.get("edge_model"), DEFAULT_EDGE),
        cloud_model=_build(ModelConfig, raw.get("cloud_model"), DEFAULT_CLOUD),
        simulation=sim,
        link=_build(LinkConfig, raw.get("link")),
        output=_build(OutputConfig, raw.get("output")),
    )


def load(path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{path}: top level must be an object")
    return from_dict(raw)


def with_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    """Apply CLI-style overrides (``tau``, ``rounds``, ``seed``, ``paradigm``); ``None`` means keep."""
    sim_changes = {k: v for k, v in overrides.items() if k in ("tau", "rounds", "paradigm") and v is not None}
    if overrides.get("seed") is not None:
        cfg = dataclasses.replace(cfg, seed=int(overrides["seed"]))
        sim_changes["seed"] = int(overrides["seed"])
    if "paradigm" in sim_changes:
        sim_changes["paradigm"] = Paradigm(sim_changes["paradigm"])
    if sim_changes:
        cfg = dataclasses.replace(cfg, simulation=dataclasses.replace(cfg.simulation, **sim_changes))
    return cfg
