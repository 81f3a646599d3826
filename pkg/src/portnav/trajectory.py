"""JSON-lines trajectory logs and bit-exact replay verification.

A log starts with a header record embedding the fully resolved config and
its hash, then per-episode reset / step / set_params records and one
summary record per finished episode.  Replay reconstructs the environment
from the header, re-applies the logged actions, and demands bit-identical
poses, rewards, and flags; the first mismatch aborts with its location.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .config import FullConfig, config_hash, config_to_dict, env_config_from_dict
from .env import ShipEnv, StepResult
from .kinematics import ControlInput, VesselParams, VesselState

LOG_SCHEMA_VERSION = 1


class ConfigMismatchError(RuntimeError):
    """The log was produced under a different resolved configuration."""


class ReplayDivergence(RuntimeError):
    def __init__(self, episode: int, t: int, field: str, expected, actual):
        self.episode = episode
        self.t = t
        self.field = field
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"replay diverged at episode {episode}, step {t}: {field} logged {expected!r}, re-simulated {actual!r}"
        )


def _pose_list(state: VesselState) -> list[float]:
    return [state.x, state.y, state.heading, state.speed, state.angular_rate]


class TrajectoryWriter:
    """Streams log records; attach to ShipEnv.trajectory_writer."""

    def __init__(self, path, config: FullConfig | dict):
        cfg_dict = config_to_dict(config) if isinstance(config, FullConfig) else config
        self.path = Path(path)
        self._fh = open(self.path, "w")
        self._write(
            {
                "type": "header",
                "schema_version": LOG_SCHEMA_VERSION,
                "config": cfg_dict,
                "config_hash": config_hash(cfg_dict),
            }
        )

    def _write(self, record: dict) -> None:
        self._fh.write(json.dumps(record) + "\n")

    def on_reset(self, episode: int, seed: int, pose: VesselState) -> None:
        self._write({"type": "reset", "episode": episode, "seed": seed, "pose": _pose_list(pose)})

    def on_step(self, episode: int, t: int, pose: VesselState, action: ControlInput, result: StepResult) -> None:
        self._write(
            {
                "type": "step",
                "episode": episode,
                "t": t,
                "pose": _pose_list(pose),
                "action": [action.thrust, action.rudder],
                "reward": result.reward,
                "terminated": result.terminated,
                "truncated": result.truncated,
                "collision": result.info["collision"],
                "goal": result.info["goal"],
            }
        )

    def on_params(self, episode: int, t: int, params: VesselParams) -> None:
        self._write(
            {
                "type": "set_params",
                "episode": episode,
                "t": t,
                "params": {
                    "mass": params.mass,
                    "turn_rate": params.turn_rate,
                    "thrust_max": params.thrust_max,
                    "speed_max": params.speed_max,
                    "angular_rate_max": params.angular_rate_max,
                    "dt": params.dt,
                },
            }
        )

    def on_episode_end(self, episode: int, length: int, ep_return: float, outcome: str) -> None:
        self._write(
            {"type": "episode", "episode": episode, "return": ep_return, "length": length, "outcome": outcome}
        )

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "TrajectoryWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_log(path) -> list[dict]:
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    if not records or records[0].get("type") != "header":
        raise ValueError(f"{path} is not a trajectory log (missing header record)")
    if records[0].get("schema_version") != LOG_SCHEMA_VERSION:
        raise ValueError(f"unsupported log schema_version {records[0].get('schema_version')!r}")
    return records


@dataclass
class ReplayReport:
    episodes: int
    steps: int
    config_hash: str


def replay_log(path, expected_config: Optional[FullConfig] = None) -> ReplayReport:
    """Re-simulate a log and verify it reproduces bit-exactly.

    Raises ReplayDivergence on the first mismatching step and
    ConfigMismatchError when expected_config hashes differently from the
    config embedded in the log.
    """
    records = read_log(path)
    header = records[0]
    if expected_config is not None and config_hash(expected_config) != header["config_hash"]:
        raise ConfigMismatchError(
            f"log was recorded under config {header['config_hash'][:12]}..., "
            f"current config hashes to {config_hash(expected_config)[:12]}..."
        )

    env = ShipEnv(env_config_from_dict(header["config"]["env"]))
    episodes = 0
    steps = 0
    for rec in records[1:]:
        kind = rec["type"]
        if kind == "reset":
            env.reset(rec["seed"])
            episodes += 1
            _compare_pose(rec, env.state, rec["episode"], -1)
        elif kind == "set_params":
            env.set_vessel_params(VesselParams(**rec["params"]))
        elif kind == "step":
            result = env.step(ControlInput(*rec["action"]))
            _compare_pose(rec, env.state, rec["episode"], rec["t"])
            if result.reward != rec["reward"]:
                raise ReplayDivergence(rec["episode"], rec["t"], "reward", rec["reward"], result.reward)
            for flag in ("terminated", "truncated"):
                if getattr(result, flag) != rec[flag]:
                    raise ReplayDivergence(rec["episode"], rec["t"], flag, rec[flag], getattr(result, flag))
            for flag in ("collision", "goal"):
                if result.info[flag] != rec[flag]:
                    raise ReplayDivergence(rec["episode"], rec["t"], flag, rec[flag], result.info[flag])
            steps += 1
        elif kind == "episode":
            continue
        else:
            raise ValueError(f"unknown record type {kind!r}")
    return ReplayReport(episodes=episodes, steps=steps, config_hash=header["config_hash"])


def _compare_pose(rec: dict, state: VesselState, episode: int, t: int) -> None:
    names = ("x", "y", "heading", "speed", "angular_rate")
    actual = _pose_list(state)
    for name, logged, now in zip(names, rec["pose"], actual):
        if logged != now:
            raise ReplayDivergence(episode, t, f"pose.{name}", logged, now)
