"""One sectioned YAML config covering environment, agents, and training.

Precedence: CLI overrides > config file > built-in defaults.  The resolved
configuration hashes to a provenance id (sha256 of its canonical JSON) that
is stamped into every artifact: checkpoints, metrics CSVs, sweep CSVs, and
trajectory logs.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any, Optional

import yaml

from .agents import BaselineConfig, SacConfig
from .env import EnvConfig
from .kinematics import VesselParams
from .sensor import SensorConfig
from .world import GenConfig


@dataclass
class TrainConfig:
    algo: str = "sac"  # sac | baseline
    total_steps: int = 100_000
    workers: int = 20
    seed: int = 0
    start_steps: int = 1_000  # uniform-random warmup actions
    update_after: int = 1_000  # min buffered transitions before learning
    updates_per_step: float = 1.0
    checkpoint_every: int = 0  # env steps between checkpoints; 0 = final only
    eval_every: int = 0  # env steps between deterministic evals; 0 = never
    eval_episodes: int = 20
    eval_seed: int = 1_000_000
    stop_at_success: Optional[float] = None  # early-stop once eval success rate reaches this

    def __post_init__(self) -> None:
        if self.algo not in ("sac", "baseline"):
            raise ValueError(f"unknown algo {self.algo!r}")
        if self.total_steps < 0 or self.workers < 1:
            raise ValueError("total_steps >= 0 and workers >= 1 required")


@dataclass
class FullConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    sac: SacConfig = field(default_factory=SacConfig)
    baseline: BaselineConfig = field(default_factory=BaselineConfig)
    train: TrainConfig = field(default_factory=TrainConfig)


_SECTIONS = {
    "env": ("env", None),
    "world": ("env", "world"),
    "sensor": ("env", "sensor"),
    "vessel": ("env", "vessel"),
    "sac": ("sac", None),
    "baseline": ("baseline", None),
    "train": ("train", None),
}


def to_dict(cfg: Any) -> Any:
    """Dataclasses -> plain dicts/lists for JSON/YAML."""
    if is_dataclass(cfg):
        return {f.name: to_dict(getattr(cfg, f.name)) for f in fields(cfg)}
    if isinstance(cfg, (list, tuple)):
        return [to_dict(v) for v in cfg]
    return cfg


def _coerce(cls, data: dict):
    """Build a dataclass from a dict, turning lists back into tuples where needed."""
    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ValueError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    kwargs = {}
    for name, v in data.items():
        if isinstance(known[name].default, tuple) and isinstance(v, (list, tuple)):
            v = tuple(v)
        kwargs[name] = v
    return cls(**kwargs)


def config_from_dict(data: dict) -> FullConfig:
    data = data or {}
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    env_fields = dict(data.get("env", {}))
    for key, sub_cls in (("world", GenConfig), ("sensor", SensorConfig), ("vessel", VesselParams)):
        merged = dict(env_fields.pop(key, {}))
        merged.update(data.get(key, {}))
        env_fields[key] = _coerce(sub_cls, merged)
    return FullConfig(
        env=_coerce(EnvConfig, env_fields),
        sac=_coerce(SacConfig, dict(data.get("sac", {}))),
        baseline=_coerce(BaselineConfig, dict(data.get("baseline", {}))),
        train=_coerce(TrainConfig, dict(data.get("train", {}))),
    )


def config_to_dict(cfg: FullConfig) -> dict:
    """Canonical nested dict: env carries world/sensor/vessel subsections."""
    d = to_dict(cfg)
    return {
        "env": d["env"],
        "sac": d["sac"],
        "baseline": d["baseline"],
        "train": d["train"],
    }


def env_config_from_dict(data: dict) -> EnvConfig:
    env_fields = dict(data)
    for key, sub_cls in (("world", GenConfig), ("sensor", SensorConfig), ("vessel", VesselParams)):
        env_fields[key] = _coerce(sub_cls, dict(env_fields.get(key, {})))
    return _coerce(EnvConfig, env_fields)


def apply_overrides(data: dict, overrides: dict[str, Any]) -> dict:
    """Apply dotted-path overrides ('train.seed': 7) onto a raw config dict."""
    for dotted, value in overrides.items():
        parts = dotted.split(".")
        if parts[0] not in _SECTIONS:
            raise ValueError(f"unknown config section in override {dotted!r}")
        node = data
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ValueError(f"override path {dotted!r} collides with a scalar")
        node[parts[-1]] = value
    return data


def load_config(path: Optional[str | Path] = None, overrides: Optional[dict[str, Any]] = None) -> FullConfig:
    """Defaults, optionally updated from a YAML file, then dotted overrides."""
    data: dict = {}
    if path is not None:
        raw = Path(path).read_text()
        loaded = yaml.safe_load(raw)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ValueError(f"config file {path} must contain a mapping")
        data = loaded
    if overrides:
        apply_overrides(data, overrides)
    return config_from_dict(data)


def save_config(cfg: FullConfig, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(config_to_dict(cfg), sort_keys=True))


def config_hash(cfg: FullConfig | dict) -> str:
    """sha256 over the canonical JSON of the resolved configuration."""
    d = config_to_dict(cfg) if isinstance(cfg, FullConfig) else cfg
    blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def parse_override_value(text: str) -> Any:
    """Parse a CLI override value with YAML scalar rules ('0.5' -> float)."""
    return yaml.safe_load(text)
