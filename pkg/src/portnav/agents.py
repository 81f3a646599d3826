"""Policies and learners: SAC, a deterministic actor-critic baseline, and a
scripted pursuit controller.

SAC is the maximum-entropy learner: squashed-Gaussian actor, twin Q-critics
with Polyak-averaged targets, and an auto-tuned temperature holding the
policy near a target entropy.  The baseline shares the same network shapes
but drops the entropy machinery (deterministic actor, exploration by action
noise), serving as the non-entropy comparator in robustness sweeps.

All gradients come from the manual reverse-mode passes in ``nn``; an update
computes every loss and gradient on the pre-update parameters, validates
finiteness, and only then applies anything, so a failed update leaves the
agent untouched.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import nn
from .env import EnvConfig, Observation
from .kinematics import ControlInput
from .sensor import SensorConfig

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
TANH_EPS = 1e-6
ACT_DIM = 2  # (thrust, rudder), both squashed to [-1, 1] at the policy level


class UpdateError(RuntimeError):
    """An update produced a non-finite loss or gradient; nothing was applied."""


@dataclass
class SacConfig:
    hidden: tuple[int, ...] = (256, 256)
    lr: float = 3e-4
    tau: float = 0.005
    batch_size: int = 256
    buffer_capacity: int = 1_000_000
    target_entropy: float = -float(ACT_DIM)
    init_alpha: float = 0.2
    auto_alpha: bool = True

    def __post_init__(self) -> None:
        self.hidden = tuple(int(h) for h in self.hidden)
        if not (0.0 < self.tau < 1.0):
            raise ValueError("tau must be in (0, 1)")
        if self.init_alpha <= 0.0:
            raise ValueError("init_alpha must be > 0")


@dataclass
class BaselineConfig:
    hidden: tuple[int, ...] = (256, 256)
    lr: float = 3e-4
    tau: float = 0.005
    batch_size: int = 256
    buffer_capacity: int = 1_000_000
    noise_std: float = 0.1

    def __post_init__(self) -> None:
        self.hidden = tuple(int(h) for h in self.hidden)
        if not (0.0 < self.tau < 1.0):
            raise ValueError("tau must be in (0, 1)")
        if self.noise_std < 0.0:
            raise ValueError("noise_std must be >= 0")


def observation_scale(obs_dim: int) -> np.ndarray:
    """Feature scaling applied before feeding observations to networks.

    Only the bearing entry (degrees in [-180, 180)) needs shrinking; all
    other features are already normalized by the environment.
    """
    scale = np.ones(obs_dim)
    scale[obs_dim - 3] = 1.0 / 180.0
    return scale


class ReplayBuffer:
    """Uniform-sampling ring buffer of transitions (float32 storage)."""

    def __init__(self, capacity: int, obs_dim: int, act_dim: int, rng: np.random.Generator):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._obs = np.empty((capacity, obs_dim), dtype=np.float32)
        self._act = np.empty((capacity, act_dim), dtype=np.float32)
        self._rew = np.empty(capacity, dtype=np.float32)
        self._next_obs = np.empty((capacity, obs_dim), dtype=np.float32)
        self._done = np.empty(capacity, dtype=np.float32)
        self._rng = rng
        self._pos = 0
        self._size = 0
        self.total_added = 0

    def __len__(self) -> int:
        return self._size

    def add(self, obs, act, rew, next_obs, done) -> None:
        i = self._pos
        self._obs[i] = obs
        self._act[i] = act
        self._rew[i] = rew
        self._next_obs[i] = next_obs
        self._done[i] = 1.0 if done else 0.0
        self._pos = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)
        self.total_added += 1

    def sample(self, batch_size: int) -> dict:
        if self._size == 0:
            raise ValueError("cannot sample from an empty buffer")
        idx = self._rng.integers(0, self._size, size=batch_size)
        return {
            "obs": self._obs[idx].astype(float),
            "act": self._act[idx].astype(float),
            "rew": self._rew[idx].astype(float),
            "next_obs": self._next_obs[idx].astype(float),
            "done": self._done[idx].astype(float),
        }


def _squash_sample(mu, log_std, eps):
    """Reparameterized squashed-Gaussian sample and its log-density."""
    std = np.exp(log_std)
    u = mu + std * eps
    a = np.tanh(u)
    log_pi = (
        -0.5 * eps**2 - log_std - 0.5 * math.log(2.0 * math.pi) - np.log(1.0 - a**2 + TANH_EPS)
    ).sum(axis=1)
    return a, log_pi, std, u


class SacPolicy:
    """Frozen actor snapshot used by rollout workers and evaluation."""

    def __init__(self, actor: nn.Mlp, thrust_max: float, obs_scale: np.ndarray):
        self.actor = actor
        self.thrust_max = thrust_max
        self.obs_scale = obs_scale

    def act_array(self, obs_vec: np.ndarray, deterministic: bool, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        obs_vec = np.asarray(obs_vec, dtype=float)
        if obs_vec.ndim != 1 or obs_vec.shape[0] != self.actor.in_dim or not np.all(np.isfinite(obs_vec)):
            raise ValueError("malformed observation vector")
        out = nn.forward(self.actor, obs_vec * self.obs_scale)
        mu, log_std = out[:ACT_DIM], np.clip(out[ACT_DIM:], LOG_STD_MIN, LOG_STD_MAX)
        if deterministic:
            return np.tanh(mu)
        if rng is None:
            raise ValueError("stochastic action sampling needs an rng")
        a, _, _, _ = _squash_sample(mu[None, :], log_std[None, :], rng.standard_normal((1, ACT_DIM)))
        return a[0]

    def act(self, obs: Observation, mode: str = "stochastic", rng: Optional[np.random.Generator] = None) -> ControlInput:
        a = self.act_array(obs.vector(), deterministic=(mode == "deterministic"), rng=rng)
        return ControlInput(thrust=float(a[0]) * self.thrust_max, rudder=float(a[1]))


class SacAgent:
    """Soft actor-critic learner over the environment's observation vector."""

    algo = "sac"

    def __init__(self, obs_dim: int, thrust_max: float, gamma: float, cfg: SacConfig, seed: int):
        self.obs_dim = obs_dim
        self.thrust_max = thrust_max
        self.gamma = gamma
        self.cfg = cfg
        self.obs_scale = observation_scale(obs_dim)

        init_rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, 0xA0))))
        self._rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, 0xA1))))
        sizes_actor = [obs_dim, *cfg.hidden, 2 * ACT_DIM]
        sizes_q = [obs_dim + ACT_DIM, *cfg.hidden, 1]
        # Small final layer keeps the initial policy near zero mean / moderate std.
        self.actor = nn.Mlp(sizes_actor, init_rng, final_scale=0.01)
        self.q1 = nn.Mlp(sizes_q, init_rng)
        self.q2 = nn.Mlp(sizes_q, init_rng)
        self.q1_target = self.q1.copy()
        self.q2_target = self.q2.copy()
        self.log_alpha = math.log(cfg.init_alpha)

        self.opt_actor = nn.AdamState.for_params(self.actor.parameters(), lr=cfg.lr)
        self.opt_q1 = nn.AdamState.for_params(self.q1.parameters(), lr=cfg.lr)
        self.opt_q2 = nn.AdamState.for_params(self.q2.parameters(), lr=cfg.lr)
        self.opt_alpha = nn.AdamState.for_params([np.zeros(1)], lr=cfg.lr)

    @property
    def alpha(self) -> float:
        return math.exp(self.log_alpha)

    def policy_snapshot(self) -> SacPolicy:
        return SacPolicy(self.actor.copy(), self.thrust_max, self.obs_scale)

    def act(self, obs: Observation, mode: str = "stochastic", rng: Optional[np.random.Generator] = None) -> ControlInput:
        return SacPolicy(self.actor, self.thrust_max, self.obs_scale).act(
            obs, mode=mode, rng=rng if rng is not None else self._rng
        )

    def _policy_forward(self, scaled_obs: np.ndarray):
        out, acts = self.actor.forward_cached(scaled_obs)
        mu = out[:, :ACT_DIM]
        log_std_raw = out[:, ACT_DIM:]
        log_std = np.clip(log_std_raw, LOG_STD_MIN, LOG_STD_MAX)
        clip_mask = (log_std_raw > LOG_STD_MIN) & (log_std_raw < LOG_STD_MAX)
        return mu, log_std, clip_mask.astype(float), acts

    def critic_targets(self, batch: dict, eps2: np.ndarray) -> np.ndarray:
        """Bootstrapped targets with the entropy bonus at the next state."""
        s2 = batch["next_obs"] * self.obs_scale
        mu2, log_std2, _, _ = self._policy_forward(s2)
        a2, log_pi2, _, _ = _squash_sample(mu2, log_std2, eps2)
        qin2 = np.concatenate([s2, a2], axis=1)
        q_next = np.minimum(nn.forward(self.q1_target, qin2)[:, 0], nn.forward(self.q2_target, qin2)[:, 0])
        return batch["rew"] + self.gamma * (1.0 - batch["done"]) * (q_next - self.alpha * log_pi2)

    def critic_loss_and_grads(self, qin: np.ndarray, y: np.ndarray):
        """Per-critic MSE losses and gradients; touches no parameters."""
        B = qin.shape[0]
        losses, grads_list = [], []
        for q in (self.q1, self.q2):
            out, acts = q.forward_cached(qin)
            diff = out[:, 0] - y
            losses.append(float(np.mean(diff**2)))
            grads, _ = q.backward_cached(acts, (2.0 / B) * diff[:, None])
            grads_list.append(grads)
        return losses, grads_list

    def actor_loss_and_grads(self, s: np.ndarray, eps: np.ndarray):
        """Reparameterized actor loss mean(alpha*logpi - minQ) and its grads.

        Gradients reach the actor through both the squashed action (via the
        min critic's input sensitivity) and the log-density terms; the
        critics themselves stay frozen here.
        """
        B = s.shape[0]
        alpha = self.alpha
        mu, log_std, clip_mask, actor_acts = self._policy_forward(s)
        a, log_pi, std, _ = _squash_sample(mu, log_std, eps)
        qina = np.concatenate([s, a], axis=1)
        q1a, c1 = self.q1.forward_cached(qina)
        q2a, c2 = self.q2.forward_cached(qina)
        q_min = np.minimum(q1a[:, 0], q2a[:, 0])
        loss = float(np.mean(alpha * log_pi - q_min))

        # d mean(Q_min)/da, routed through whichever critic attains the min.
        pick1 = (q1a[:, 0] <= q2a[:, 0]).astype(float)[:, None] / B
        _, dx1 = self.q1.backward_cached(c1, pick1)
        _, dx2 = self.q2.backward_cached(c2, (1.0 / B) - pick1)
        g_action = (dx1 + dx2)[:, self.obs_dim :]

        dl_da = (alpha / B) * (2.0 * a / (1.0 - a**2 + TANH_EPS)) - g_action
        dl_du = dl_da * (1.0 - a**2)
        d_mu = dl_du
        d_log_std = (dl_du * std * eps - alpha / B) * clip_mask
        grads, _ = self.actor.backward_cached(actor_acts, np.concatenate([d_mu, d_log_std], axis=1))
        return loss, grads, log_pi

    def update(self, batch: dict) -> dict:
        """One gradient step on critics, actor, and temperature + Polyak sync."""
        cfg = self.cfg
        B = batch["obs"].shape[0]
        s = batch["obs"] * self.obs_scale

        y = self.critic_targets(batch, self._rng.standard_normal((B, ACT_DIM)))
        qin = np.concatenate([s, batch["act"]], axis=1)
        critic_losses, critic_grads = self.critic_loss_and_grads(qin, y)

        actor_loss, actor_grads, log_pi = self.actor_loss_and_grads(s, self._rng.standard_normal((B, ACT_DIM)))

        entropy_gap = float(np.mean(log_pi) + cfg.target_entropy)
        alpha_loss = -self.log_alpha * entropy_gap
        alpha_grad = -entropy_gap

        losses = {
            "critic_loss": 0.5 * (critic_losses[0] + critic_losses[1]),
            "actor_loss": actor_loss,
            "alpha_loss": alpha_loss,
            "alpha": self.alpha,
            "entropy": float(-np.mean(log_pi)),
        }
        flat = [g for grads in (*critic_grads, actor_grads) for g in grads]
        if not all(math.isfinite(v) for v in losses.values()) or not math.isfinite(alpha_grad) or not all(
            np.all(np.isfinite(g)) for g in flat
        ):
            raise UpdateError(f"non-finite update: {losses}")

        nn.adam_update(self.q1.parameters(), critic_grads[0], self.opt_q1)
        nn.adam_update(self.q2.parameters(), critic_grads[1], self.opt_q2)
        nn.adam_update(self.actor.parameters(), actor_grads, self.opt_actor)
        if cfg.auto_alpha:
            la = np.array([self.log_alpha])
            nn.adam_update([la], [np.array([alpha_grad])], self.opt_alpha)
            self.log_alpha = float(la[0])
        nn.polyak_update(self.q1_target, self.q1, cfg.tau)
        nn.polyak_update(self.q2_target, self.q2, cfg.tau)
        return losses

    def checkpoint_arrays(self) -> dict:
        arrays = {}
        for name, net in (
            ("actor", self.actor),
            ("q1", self.q1),
            ("q2", self.q2),
            ("q1_target", self.q1_target),
            ("q2_target", self.q2_target),
        ):
            for i, p in enumerate(net.parameters()):
                arrays[f"{name}/p{i}"] = p
        for name, opt in (("actor", self.opt_actor), ("q1", self.opt_q1), ("q2", self.opt_q2), ("alpha", self.opt_alpha)):
            for i, (m, v) in enumerate(zip(opt.m, opt.v)):
                arrays[f"opt/{name}/m{i}"] = m
                arrays[f"opt/{name}/v{i}"] = v
        arrays["log_alpha"] = np.array([self.log_alpha])
        return arrays

    def checkpoint_meta(self) -> dict:
        return {
            "algo": self.algo,
            "obs_dim": self.obs_dim,
            "thrust_max": self.thrust_max,
            "gamma": self.gamma,
            "hidden": list(self.cfg.hidden),
            "opt_t": {
                "actor": self.opt_actor.t,
                "q1": self.opt_q1.t,
                "q2": self.opt_q2.t,
                "alpha": self.opt_alpha.t,
            },
            "agent_config": {
                "lr": self.cfg.lr,
                "tau": self.cfg.tau,
                "batch_size": self.cfg.batch_size,
                "buffer_capacity": self.cfg.buffer_capacity,
                "target_entropy": self.cfg.target_entropy,
                "init_alpha": self.cfg.init_alpha,
                "auto_alpha": self.cfg.auto_alpha,
            },
        }

    def load_arrays(self, meta: dict, arrays: dict) -> None:
        for name, net in (
            ("actor", self.actor),
            ("q1", self.q1),
            ("q2", self.q2),
            ("q1_target", self.q1_target),
            ("q2_target", self.q2_target),
        ):
            net.load_parameters([arrays[f"{name}/p{i}"] for i in range(len(net.parameters()))])
        for name, opt in (("actor", self.opt_actor), ("q1", self.opt_q1), ("q2", self.opt_q2), ("alpha", self.opt_alpha)):
            opt.t = int(meta["opt_t"][name])
            for i in range(len(opt.m)):
                opt.m[i][...] = arrays[f"opt/{name}/m{i}"]
                opt.v[i][...] = arrays[f"opt/{name}/v{i}"]
        self.log_alpha = float(arrays["log_alpha"][0])

    @classmethod
    def from_checkpoint(cls, meta: dict, arrays: dict, seed: int = 0) -> "SacAgent":
        cfg = SacConfig(hidden=tuple(meta["hidden"]), **meta["agent_config"])
        agent = cls(meta["obs_dim"], meta["thrust_max"], meta["gamma"], cfg, seed)
        agent.load_arrays(meta, arrays)
        return agent


class BaselinePolicy:
    """Deterministic-actor snapshot; exploration adds clipped Gaussian noise."""

    def __init__(self, actor: nn.Mlp, thrust_max: float, obs_scale: np.ndarray, noise_std: float):
        self.actor = actor
        self.thrust_max = thrust_max
        self.obs_scale = obs_scale
        self.noise_std = noise_std

    def act_array(self, obs_vec: np.ndarray, deterministic: bool, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        obs_vec = np.asarray(obs_vec, dtype=float)
        if obs_vec.ndim != 1 or obs_vec.shape[0] != self.actor.in_dim or not np.all(np.isfinite(obs_vec)):
            raise ValueError("malformed observation vector")
        a = np.tanh(nn.forward(self.actor, obs_vec * self.obs_scale))
        if deterministic:
            return a
        if rng is None:
            raise ValueError("stochastic action sampling needs an rng")
        return np.clip(a + self.noise_std * rng.standard_normal(ACT_DIM), -1.0, 1.0)

    def act(self, obs: Observation, mode: str = "stochastic", rng: Optional[np.random.Generator] = None) -> ControlInput:
        a = self.act_array(obs.vector(), deterministic=(mode == "deterministic"), rng=rng)
        return ControlInput(thrust=float(a[0]) * self.thrust_max, rudder=float(a[1]))


class BaselineAgent:
    """Deterministic actor-critic (twin critics, target networks, no entropy)."""

    algo = "baseline"

    def __init__(self, obs_dim: int, thrust_max: float, gamma: float, cfg: BaselineConfig, seed: int):
        self.obs_dim = obs_dim
        self.thrust_max = thrust_max
        self.gamma = gamma
        self.cfg = cfg
        self.obs_scale = observation_scale(obs_dim)

        init_rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, 0xB0))))
        self._rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, 0xB1))))
        self.actor = nn.Mlp([obs_dim, *cfg.hidden, ACT_DIM], init_rng, final_scale=0.01)
        self.q1 = nn.Mlp([obs_dim + ACT_DIM, *cfg.hidden, 1], init_rng)
        self.q2 = nn.Mlp([obs_dim + ACT_DIM, *cfg.hidden, 1], init_rng)
        self.actor_target = self.actor.copy()
        self.q1_target = self.q1.copy()
        self.q2_target = self.q2.copy()

        self.opt_actor = nn.AdamState.for_params(self.actor.parameters(), lr=cfg.lr)
        self.opt_q1 = nn.AdamState.for_params(self.q1.parameters(), lr=cfg.lr)
        self.opt_q2 = nn.AdamState.for_params(self.q2.parameters(), lr=cfg.lr)

    def policy_snapshot(self) -> BaselinePolicy:
        return BaselinePolicy(self.actor.copy(), self.thrust_max, self.obs_scale, self.cfg.noise_std)

    def act(self, obs: Observation, mode: str = "stochastic", rng: Optional[np.random.Generator] = None) -> ControlInput:
        return BaselinePolicy(self.actor, self.thrust_max, self.obs_scale, self.cfg.noise_std).act(
            obs, mode=mode, rng=rng if rng is not None else self._rng
        )

    def update(self, batch: dict) -> dict:
        cfg = self.cfg
        B = batch["obs"].shape[0]
        s = batch["obs"] * self.obs_scale
        s2 = batch["next_obs"] * self.obs_scale

        a2 = np.tanh(nn.forward(self.actor_target, s2))
        qin2 = np.concatenate([s2, a2], axis=1)
        q_next = np.minimum(nn.forward(self.q1_target, qin2)[:, 0], nn.forward(self.q2_target, qin2)[:, 0])
        y = batch["rew"] + self.gamma * (1.0 - batch["done"]) * q_next

        qin = np.concatenate([s, batch["act"]], axis=1)
        critic_losses = []
        critic_grads = []
        for q in (self.q1, self.q2):
            out, acts = q.forward_cached(qin)
            diff = out[:, 0] - y
            critic_losses.append(float(np.mean(diff**2)))
            grads, _ = q.backward_cached(acts, (2.0 / B) * diff[:, None])
            critic_grads.append(grads)

        out, actor_acts = self.actor.forward_cached(s)
        a = np.tanh(out)
        qina = np.concatenate([s, a], axis=1)
        q1a, c1 = self.q1.forward_cached(qina)
        actor_loss = float(-np.mean(q1a[:, 0]))
        _, dx = self.q1.backward_cached(c1, np.full((B, 1), -1.0 / B))
        dl_du = dx[:, self.obs_dim :] * (1.0 - a**2)
        actor_grads, _ = self.actor.backward_cached(actor_acts, dl_du)

        losses = {
            "critic_loss": 0.5 * (critic_losses[0] + critic_losses[1]),
            "actor_loss": actor_loss,
            "alpha_loss": 0.0,
            "alpha": 0.0,
            "entropy": 0.0,
        }
        flat = [g for grads in (*critic_grads, actor_grads) for g in grads]
        if not all(math.isfinite(v) for v in losses.values()) or not all(np.all(np.isfinite(g)) for g in flat):
            raise UpdateError(f"non-finite update: {losses}")

        nn.adam_update(self.q1.parameters(), critic_grads[0], self.opt_q1)
        nn.adam_update(self.q2.parameters(), critic_grads[1], self.opt_q2)
        nn.adam_update(self.actor.parameters(), actor_grads, self.opt_actor)
        nn.polyak_update(self.q1_target, self.q1, cfg.tau)
        nn.polyak_update(self.q2_target, self.q2, cfg.tau)
        nn.polyak_update(self.actor_target, self.actor, cfg.tau)
        return losses

    def checkpoint_arrays(self) -> dict:
        arrays = {}
        for name, net in (
            ("actor", self.actor),
            ("q1", self.q1),
            ("q2", self.q2),
            ("actor_target", self.actor_target),
            ("q1_target", self.q1_target),
            ("q2_target", self.q2_target),
        ):
            for i, p in enumerate(net.parameters()):
                arrays[f"{name}/p{i}"] = p
        for name, opt in (("actor", self.opt_actor), ("q1", self.opt_q1), ("q2", self.opt_q2)):
            for i, (m, v) in enumerate(zip(opt.m, opt.v)):
                arrays[f"opt/{name}/m{i}"] = m
                arrays[f"opt/{name}/v{i}"] = v
        return arrays

    def checkpoint_meta(self) -> dict:
        return {
            "algo": self.algo,
            "obs_dim": self.obs_dim,
            "thrust_max": self.thrust_max,
            "gamma": self.gamma,
            "hidden": list(self.cfg.hidden),
            "opt_t": {"actor": self.opt_actor.t, "q1": self.opt_q1.t, "q2": self.opt_q2.t},
            "agent_config": {
                "lr": self.cfg.lr,
                "tau": self.cfg.tau,
                "batch_size": self.cfg.batch_size,
                "buffer_capacity": self.cfg.buffer_capacity,
                "noise_std": self.cfg.noise_std,
            },
        }

    def load_arrays(self, meta: dict, arrays: dict) -> None:
        for name, net in (
            ("actor", self.actor),
            ("q1", self.q1),
            ("q2", self.q2),
            ("actor_target", self.actor_target),
            ("q1_target", self.q1_target),
            ("q2_target", self.q2_target),
        ):
            net.load_parameters([arrays[f"{name}/p{i}"] for i in range(len(net.parameters()))])
        for name, opt in (("actor", self.opt_actor), ("q1", self.opt_q1), ("q2", self.opt_q2)):
            opt.t = int(meta["opt_t"][name])
            for i in range(len(opt.m)):
                opt.m[i][...] = arrays[f"opt/{name}/m{i}"]
                opt.v[i][...] = arrays[f"opt/{name}/v{i}"]

    @classmethod
    def from_checkpoint(cls, meta: dict, arrays: dict, seed: int = 0) -> "BaselineAgent":
        cfg = BaselineConfig(hidden=tuple(meta["hidden"]), **meta["agent_config"])
        agent = cls(meta["obs_dim"], meta["thrust_max"], meta["gamma"], cfg, seed)
        agent.load_arrays(meta, arrays)
        return agent


def scripted_pursuit(
    obs: Observation,
    thrust_max: float = 400_000.0,
    sensor_cfg: SensorConfig = SensorConfig(),
) -> ControlInput:
    """Stateless goal chaser: steer toward the bearing, throttle on clearance.

    Slows when the forward cone shows short ranges or the goal sits behind,
    brakes (reverse thrust) rather than coasting into walls.
    """
    from .sensor import ray_angles

    offsets = ray_angles(0.0, sensor_cfg)
    offsets = (offsets + 180.0) % 360.0 - 180.0
    forward = np.abs(offsets) <= 45.0
    clear_m = float(np.min(obs.normalized_ranges[forward])) * sensor_cfg.max_range

    rudder = float(np.clip(obs.goal_bearing / 30.0, -1.0, 1.0))
    align = math.cos(math.radians(min(abs(obs.goal_bearing), 90.0)))
    target_speed = np.clip((clear_m - 12.0) / 40.0, 0.0, 1.0) * max(align, 0.15)
    thrust = float(np.clip(2.0 * (target_speed - obs.speed), -1.0, 1.0)) * thrust_max
    return ControlInput(thrust=thrust, rudder=rudder)


class ScriptedAgent:
    """Adapter exposing scripted_pursuit through the policy interface."""

    algo = "scripted"

    def __init__(self, env_cfg: EnvConfig):
        self.thrust_max = env_cfg.vessel.thrust_max
        self.sensor_cfg = env_cfg.sensor

    def act(self, obs: Observation, mode: str = "deterministic", rng=None) -> ControlInput:
        return scripted_pursuit(obs, self.thrust_max, self.sensor_cfg)

    def policy_snapshot(self) -> "ScriptedAgent":
        return self
