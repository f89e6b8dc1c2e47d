"""Run configuration: defaults plus INI-style config file parsing.

Defaults mirror the published protocol: embedding dimension 100, batch
100, margin 2, Adam at 1e-4, max 5 epochs, 2-degree subgraphs with a
1000-neighbor cap, top-3 explanations, and rule thresholds theta=5,
HC>0.7, support>=20.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields

from xkgat.errors import DataError
from xkgat.model import ModelConfig
from xkgat.trainer import TrainConfig


@dataclass
class RunConfig:
    d: int = 100
    layers: int = 2
    omega: tuple[float, ...] = ()
    norm: str = "L1"
    max_depth: int = 2
    neighbor_cap: int = 1000

    batch_size: int = 100
    learning_rate: float = 1e-4
    gamma: float = 2.0
    max_epochs: int = 5
    patience: int = 2
    seed: int = 0

    test_fraction: float = 0.2
    valid_fraction: float = 0.05
    regime: str = "all"

    top_k: int = 3
    theta: int = 5
    hc_min: float = 0.7
    support_min: int = 20

    def model_config(self) -> ModelConfig:
        return ModelConfig(
            d=self.d,
            layers=self.layers,
            omega=self.omega,
            norm=self.norm,
            max_depth=self.max_depth,
            neighbor_cap=self.neighbor_cap,
        )

    def train_config(self, init: str = "uniform", init_checkpoint: str | None = None) -> TrainConfig:
        return TrainConfig(
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            gamma=self.gamma,
            max_epochs=self.max_epochs,
            patience=self.patience,
            seed=self.seed,
            init=init,
            init_checkpoint=init_checkpoint,
        )


_SECTIONS = ("model", "train", "split", "explain", "rules")


def load_run_config(path: str | None, overrides: dict | None = None) -> RunConfig:
    """Read an INI config (sections [model]/[train]/[split]/[explain]/[rules]);
    flag overrides win over file values."""
    values: dict = {}
    if path:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise DataError(f"config file not found: {path}")
        for section in parser.sections():
            if section not in _SECTIONS and not section.startswith("rule."):
                raise DataError(f"unknown config section [{section}]")
            if section.startswith("rule."):
                continue
            for key, raw in parser.items(section):
                values[key] = raw
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value

    cfg = RunConfig()
    typed = {f.name: f.type for f in fields(RunConfig)}
    for key, raw in values.items():
        if key not in typed:
            raise DataError(f"unknown config key {key!r}")
        current = getattr(cfg, key)
        if key == "omega":
            if isinstance(raw, str):
                raw = tuple(float(p) for p in raw.split(",") if p.strip())
            setattr(cfg, key, tuple(raw))
        elif isinstance(current, bool):
            setattr(cfg, key, str(raw).lower() in ("1", "true", "yes"))
        elif isinstance(current, int):
            setattr(cfg, key, int(raw))
        elif isinstance(current, float):
            setattr(cfg, key, float(raw))
        else:
            setattr(cfg, key, str(raw))
    return cfg
