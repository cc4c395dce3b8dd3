"""Simulation configuration and its structured-text loader (YAML or JSON)."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from ..airlink import BITS_PER_SYMBOL
from ..powerctl import SCHEMES, PowerAllocation, allocate
from ..topology import Scenario, ScenarioError, build_scenario, preset

log = logging.getLogger(__name__)

DEFAULT_SNR_GRID = tuple(float(s) for s in range(0, 41, 2))
LEGS = ("hybrid", "tdma")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    scenario: Scenario
    power_scheme: str
    a2_watts: float = 40.0
    splits: tuple | None = None
    c: float | None = None
    snr_grid_db: tuple[float, ...] = DEFAULT_SNR_GRID
    frames: int = 100
    frame_bits: int = 6144
    master_seed: int = 0
    legs: tuple[str, ...] = LEGS
    output_path: str | None = None
    workers: int = 1
    reference_power: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))
        object.__setattr__(self, "legs", tuple(self.legs))
        self.validate()

    def validate(self):
        if self.frames < 1:
            raise ConfigError("frames must be >= 1")
        if not self.snr_grid_db:
            raise ConfigError("snr_grid_db must be nonempty")
        if any(np.isnan(s) for s in self.snr_grid_db):
            raise ConfigError("snr_grid_db contains NaN")
        bad = set(self.legs) - set(LEGS)
        if bad:
            raise ConfigError(f"unknown legs {sorted(bad)}; choose from {LEGS}")
        if self.power_scheme not in SCHEMES:
            raise ConfigError(f"unknown power scheme {self.power_scheme!r}; choose from {SCHEMES}")
        unit = BITS_PER_SYMBOL * self.scenario.L
        if self.frame_bits % unit:
            raise ConfigError(f"frame_bits must be divisible by {unit} (bits per symbol x streams)")
        if self.frame_bits // self.scenario.K < unit:
            raise ConfigError("frame_bits too small to give every user one symbol block")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.a2_watts < 0:
            raise ConfigError("a2_watts must be non-negative")
        try:
            self.allocation()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def allocation(self) -> PowerAllocation:
        return allocate(self.scenario, self.power_scheme, self.a2_watts, splits=self.splits, c=self.c)

    @property
    def blocks_per_user(self) -> int:
        return (self.frame_bits // self.scenario.K) // (BITS_PER_SYMBOL * self.scenario.L)

    @property
    def bits_per_user(self) -> int:
        return self.blocks_per_user * BITS_PER_SYMBOL * self.scenario.L

    @property
    def dropped_bits(self) -> int:
        return self.frame_bits - self.scenario.K * self.bits_per_user

    def with_overrides(self, **kw) -> "SimConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def to_mapping(self) -> dict[str, Any]:
        return {
            "scenario": {**self.scenario.to_config(), "name": self.scenario.name},
            "power": {
                "scheme": self.power_scheme,
                "a2_watts": self.a2_watts,
                "splits": None if self.splits is None else list(self.splits),
                "c": self.c,
            },
            "snr_grid_db": list(self.snr_grid_db),
            "frames": self.frames,
            "frame_bits": self.frame_bits,
            "master_seed": self.master_seed,
            "legs": list(self.legs),
            "output_path": self.output_path,
            "workers": self.workers,
            "reference_power": self.reference_power,
        }


def default_power(scenario: Scenario) -> dict[str, Any]:
    if scenario.is_siso:
        return {"scheme": "siso-fixed"}
    if all(len(g) == 2 for g in scenario.groups):
        return {"scheme": "mimo-sinr", "c": 0.0255}
    return {"scheme": "mimo-rate", "splits": [0.5] * scenario.T}


def _scenario(raw) -> Scenario:
    if raw is None:
        raise ConfigError("config needs a 'scenario' (preset name or mapping)")
    try:
        if isinstance(raw, str):
            return preset(raw)
        if "preset" in raw:
            return preset(raw["preset"])
        return build_scenario(raw)
    except KeyError as exc:
        raise ConfigError(str(exc)) from None
    except ScenarioError as exc:
        raise ConfigError(f"invalid scenario: {exc}") from None


def config_from_mapping(raw: Mapping[str, Any], **overrides) -> SimConfig:
    """Build a :class:`SimConfig` from a parsed config file.

    Keyword overrides (``scenario``, ``snr_grid_db``, ``frames``, ...) take
    precedence; ``None`` values are ignored.
    """
    raw = dict(raw or {})
    raw.update({k: v for k, v in overrides.items() if v is not None})
    scenario = raw["scenario"] if isinstance(raw.get("scenario"), Scenario) else _scenario(raw.get("scenario"))
    power = dict(raw.get("power") or default_power(scenario))
    splits = power.get("splits")
    grid = raw.get("snr_grid_db", DEFAULT_SNR_GRID)
    try:
        cfg = SimConfig(
            scenario=scenario,
            power_scheme=power.get("scheme", default_power(scenario)["scheme"]),
            a2_watts=float(power.get("a2_watts", 40.0)),
            splits=None if splits is None else tuple(splits),
            c=None if power.get("c") is None else float(power["c"]),
            snr_grid_db=tuple(float(s) for s in grid),
            frames=int(raw.get("frames", 100)),
            frame_bits=int(raw.get("frame_bits", 6144)),
            master_seed=int(raw.get("master_seed", 0)),
            legs=tuple(raw.get("legs", LEGS)),
            output_path=raw.get("output_path"),
            workers=int(raw.get("workers", 1)),
            reference_power=float(raw.get("reference_power", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    if cfg.dropped_bits:
        log.warning("frame of %d bits does not split evenly over %d users x %d streams; "
                    "dropping %d bits per frame", cfg.frame_bits, scenario.K, scenario.L, cfg.dropped_bits)
    return cfg


def load_config(path: str | Path, **overrides) -> SimConfig:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        raw = json.loads(text)
    else:
        raw = yaml.safe_load(text)
    if raw is not None and not isinstance(raw, Mapping):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_mapping(raw or {}, **overrides)
