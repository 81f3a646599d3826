"""Episodic navigation environment: kinematics + world + sensor + rewards.

Each episode drops the vessel at a seeded random spawn in a freshly
generated scene and ends on goal contact (positive terminal reward),
collision (negative terminal reward), or the step horizon (truncation).
Progress shaping rewards reducing the straight-line distance to the goal.

Episodes are fully deterministic functions of (seed, action sequence,
parameter schedule).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .kinematics import ControlInput, VesselParams, VesselState, clamp, step as kin_step
from .sensor import SensorConfig, scan
from .world import GenConfig, WorldScene, advance_dynamics, check_collision, check_goal, generate


class EpisodeStateError(RuntimeError):
    """step() called before reset() or after the episode finished."""


@dataclass
class EnvConfig:
    gamma: float = 0.99
    horizon: int = 600
    r_goal: float = 100.0
    r_collision: float = -100.0
    r_step: float = -0.05
    r_progress: float = 0.5  # per meter of goal-distance reduction
    ego_radius: float = 4.0
    world: GenConfig = field(default_factory=GenConfig)
    sensor: SensorConfig = field(default_factory=SensorConfig)
    vessel: VesselParams = field(default_factory=VesselParams)

    def __post_init__(self) -> None:
        if not (0.0 < self.gamma < 1.0):
            raise ValueError("gamma must be in (0, 1)")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.ego_radius <= 0.0:
            raise ValueError("ego_radius must be > 0")

    @property
    def obs_dim(self) -> int:
        return self.sensor.n_rays + 4


@dataclass(frozen=True)
class Observation:
    """Fixed-length feature vector fed to policies.

    normalized_ranges are ranges / max_range in (0, 1]; goal_distance is
    normalized by the scene diagonal; goal_bearing is degrees in [-180, 180)
    relative to the heading; speed and angular_rate are normalized by their
    clamp limits.
    """

    normalized_ranges: np.ndarray
    goal_distance: float
    goal_bearing: float
    speed: float
    angular_rate: float

    def vector(self) -> np.ndarray:
        return np.concatenate(
            [
                self.normalized_ranges,
                [self.goal_distance, self.goal_bearing, self.speed, self.angular_rate],
            ]
        )

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "Observation":
        vec = np.asarray(vec, dtype=float)
        return cls(
            normalized_ranges=vec[:-4],
            goal_distance=float(vec[-4]),
            goal_bearing=float(vec[-3]),
            speed=float(vec[-2]),
            angular_rate=float(vec[-1]),
        )


@dataclass
class StepResult:
    observation: Observation
    reward: float
    terminated: bool
    truncated: bool
    info: dict


def wrap_bearing(angle: float) -> float:
    """Wrap an angle in degrees into [-180, 180)."""
    return (angle + 180.0) % 360.0 - 180.0


def discounted_return(rewards, gamma: float) -> float:
    """Sum of gamma^t * r_t over an episode."""
    if not (0.0 < gamma <= 1.0):
        raise ValueError("gamma must be in (0, 1]")
    acc = 0.0
    for r in reversed(list(rewards)):
        acc = r + gamma * acc
    return acc


class ShipEnv:
    """Single-threaded environment instance; many may run in parallel.

    An attached trajectory writer (duck-typed: on_reset / on_step /
    on_episode_end) receives one record per step plus an episode summary.
    """

    def __init__(self, cfg: EnvConfig):
        self.cfg = cfg
        self._params = cfg.vessel
        self._scene: Optional[WorldScene] = None
        self._state: Optional[VesselState] = None
        self._t = 0
        self._done = True
        self._prev_goal_dist = 0.0
        self._ep_return = 0.0
        self._episode_index = -1
        self._episode_seed: Optional[int] = None
        self._noise_rng: Optional[np.random.Generator] = None
        self.trajectory_writer = None

    @property
    def scene(self) -> Optional[WorldScene]:
        return self._scene

    @property
    def state(self) -> Optional[VesselState]:
        return self._state

    @property
    def steps(self) -> int:
        return self._t

    @property
    def done(self) -> bool:
        return self._done

    @property
    def episode_seed(self) -> Optional[int]:
        return self._episode_seed

    @property
    def vessel_params(self) -> VesselParams:
        return self._params

    def set_vessel_params(self, params) -> None:
        """Swap the physical parameters; applies from the next step."""
        if not isinstance(params, VesselParams):
            params = VesselParams(**params)
        self._params = params
        if self.trajectory_writer is not None:
            self.trajectory_writer.on_params(self._episode_index, self._t, params)

    def reset(self, seed: int) -> Observation:
        self._scene = generate(seed, self.cfg.world)
        self._state = self._scene.spawn_pose
        self._t = 0
        self._done = False
        self._ep_return = 0.0
        self._episode_index += 1
        self._episode_seed = seed
        self._prev_goal_dist = self._goal_distance()
        self._noise_rng = (
            np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, 0x5E15))))
            if self.cfg.sensor.noise_std > 0.0
            else None
        )
        obs = self._observe()
        if self.trajectory_writer is not None:
            self.trajectory_writer.on_reset(self._episode_index, seed, self._state)
        return obs

    def step(self, action: ControlInput) -> StepResult:
        if self._scene is None:
            raise EpisodeStateError("reset() must be called before step()")
        if self._done:
            raise EpisodeStateError("episode already finished; call reset()")

        clamped = clamp(action, self._params)
        advance_dynamics(self._scene, self._params.dt)
        self._state = kin_step(self._state, clamped, self._params)

        goal = check_goal(self._scene, self._state)
        collision = False if goal else check_collision(self._scene, self._state, self.cfg.ego_radius)
        dist = self._goal_distance()

        if goal:
            reward = self.cfg.r_goal
        elif collision:
            reward = self.cfg.r_collision
        else:
            reward = self.cfg.r_step + self.cfg.r_progress * (self._prev_goal_dist - dist)
        self._prev_goal_dist = dist

        self._t += 1
        terminated = goal or collision
        truncated = (not terminated) and self._t >= self.cfg.horizon
        self._done = terminated or truncated
        self._ep_return += reward

        obs = self._observe()
        info = {"collision": collision, "goal": goal, "distance_to_goal": dist}
        result = StepResult(obs, reward, terminated, truncated, info)

        if self.trajectory_writer is not None:
            self.trajectory_writer.on_step(
                self._episode_index, self._t - 1, self._state, action, result
            )
            if self._done:
                outcome = "goal" if goal else ("collision" if collision else "timeout")
                self.trajectory_writer.on_episode_end(
                    self._episode_index, self._t, self._ep_return, outcome
                )
        return result

    def episode_return(self) -> float:
        """Undiscounted reward sum of the current episode so far."""
        return self._ep_return

    def _goal_distance(self) -> float:
        gx, gy = self._scene.goal.center
        return math.hypot(self._state.x - gx, self._state.y - gy)

    def _observe(self) -> Observation:
        ranges = scan(self._scene, self._state, self.cfg.sensor, self._noise_rng).ranges
        bearing = wrap_bearing(
            math.degrees(
                math.atan2(
                    self._scene.goal.center[0] - self._state.x,
                    self._scene.goal.center[1] - self._state.y,
                )
            )
            - self._state.heading
        )
        return Observation(
            normalized_ranges=ranges / self.cfg.sensor.max_range,
            goal_distance=self._prev_goal_dist / self._scene.diagonal,
            goal_bearing=bearing,
            speed=self._state.speed / self._params.speed_max,
            angular_rate=self._state.angular_rate / self._params.angular_rate_max,
        )
