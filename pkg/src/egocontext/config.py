"""Run configuration with the documented defaults."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Union

from egocontext.core import EngineConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class NetworkParams:
    eta: int
    layers: int

    def engine(self) -> EngineConfig:
        return EngineConfig(eta=self.eta, num_layers=self.layers)


@dataclass(frozen=True)
class RunConfig:
    lam: float = 0.5
    rssi_threshold: int = -65
    delta_max_s: float = 300.0
    window_s: float = 60.0
    social: NetworkParams = field(default_factory=lambda: NetworkParams(150, 4))
    proximity: NetworkParams = field(default_factory=lambda: NetworkParams(500, 6))
    gps: NetworkParams = field(default_factory=lambda: NetworkParams(15, 3))
    radius_max_m: float = 100.0

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigError(f"lambda out of range [0, 1]: {self.lam}")
        if self.delta_max_s <= 0:
            raise ConfigError("delta_max_s must be positive")
        if self.window_s <= 0 or self.window_ms <= 0:
            raise ConfigError("window_s must be positive")
        if self.radius_max_m <= 0:
            raise ConfigError("radius_max_m must be positive")
        for name in ("social", "proximity", "gps"):
            p = getattr(self, name)
            if p.layers < 1 or p.eta < p.layers:
                raise ConfigError(f"{name}: need eta >= layers >= 1")

    @property
    def window_ms(self) -> int:
        return int(round(self.window_s * 1000))

    @property
    def delta_max_ms(self) -> int:
        return int(round(self.delta_max_s * 1000))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for name in ("social", "proximity", "gps"):
            if name in data:
                sub = data[name]
                if not isinstance(sub, dict) or set(sub) - {"eta", "layers"}:
                    raise ConfigError(f"{name} must be an object with eta/layers")
                default = getattr(cls(), name)
                data[name] = NetworkParams(int(sub.get("eta", default.eta)),
                                           int(sub.get("layers", default.layers)))
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def load_config(path: Union[str, Path, None]) -> RunConfig:
    if path is None:
        return RunConfig()
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return RunConfig.from_dict(data)
