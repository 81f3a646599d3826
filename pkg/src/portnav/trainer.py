"""Parallel experience collection feeding a single learner, plus evaluation.

Rollout workers each own one environment and a read-only policy snapshot
refreshed every collection round; completed episodes are inserted into the
one replay buffer in worker order, so runs are reproducible for any worker
count (and byte-identical metrics for a fixed seed).  The learner then
takes one gradient step per collected transition (configurable ratio).
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import nn
from .agents import BaselineAgent, ReplayBuffer, SacAgent, ACT_DIM
from .config import FullConfig, config_hash, config_to_dict, env_config_from_dict
from .env import EnvConfig, ShipEnv
from .kinematics import ControlInput, VesselParams

CHECKPOINT_SCHEMA_VERSION = 1
METRICS_SCHEMA = "portnav-metrics v1"
METRICS_COLUMNS = (
    "env_steps",
    "episodes",
    "mean_return",
    "std_return",
    "episode_len",
    "critic_loss",
    "actor_loss",
    "alpha",
    "entropy",
    "eval_mean_return",
    "eval_success_rate",
)


class TrainingError(RuntimeError):
    """A rollout worker or learner update failed; see the chained cause."""


def derive_seed(*parts) -> int:
    """Deterministic 64-bit seed from a tuple of integers."""
    return int(np.random.SeedSequence(tuple(int(p) for p in parts)).generate_state(1, np.uint64)[0])


@dataclass
class EvalStats:
    mean_return: float
    std_return: float
    success_rate: float
    collision_rate: float
    mean_length: float
    n_episodes: int


@dataclass
class TrainResult:
    checkpoint_path: Path
    metrics_path: Path
    env_steps: int
    episodes: int
    final_eval: Optional[EvalStats]
    stopped_early: bool


def make_agent(cfg: FullConfig):
    obs_dim = cfg.env.obs_dim
    thrust_max = cfg.env.vessel.thrust_max
    if cfg.train.algo == "sac":
        return SacAgent(obs_dim, thrust_max, cfg.env.gamma, cfg.sac, cfg.train.seed)
    return BaselineAgent(obs_dim, thrust_max, cfg.env.gamma, cfg.baseline, cfg.train.seed)


def save_agent_checkpoint(path, agent, cfg: FullConfig, env_steps: int = 0, rng_states: Optional[dict] = None) -> Path:
    meta = {
        "schema_version": CHECKPOINT_SCHEMA_VERSION,
        "config": config_to_dict(cfg),
        "config_hash": config_hash(cfg),
        "env_steps": env_steps,
        "agent": agent.checkpoint_meta(),
        "rng": rng_states or {},
    }
    path = Path(path)
    if path.suffix != ".npz":
        path = path.with_suffix(path.suffix + ".npz")
    path.parent.mkdir(parents=True, exist_ok=True)
    nn.save_checkpoint(path, meta, agent.checkpoint_arrays())
    return path


def load_agent_checkpoint(path, seed: int = 0):
    """Rebuild the agent stored at path; returns (agent, meta)."""
    meta, arrays = nn.load_checkpoint(path)
    if meta.get("schema_version") != CHECKPOINT_SCHEMA_VERSION:
        raise ValueError(f"unsupported checkpoint schema_version {meta.get('schema_version')!r}")
    algo = meta["agent"]["algo"]
    cls = SacAgent if algo == "sac" else BaselineAgent
    agent = cls.from_checkpoint(meta["agent"], arrays, seed=seed)
    return agent, meta


def _episode_outcome(info: dict, truncated: bool) -> str:
    if info["goal"]:
        return "goal"
    if info["collision"]:
        return "collision"
    return "timeout" if truncated else "aborted"


def collect_episode(env: ShipEnv, policy, seed: int, rng: np.random.Generator, random_actions: bool):
    """Roll one stochastic-policy episode; returns (transitions, return, length, outcome)."""
    obs = env.reset(seed)
    obs_vec = obs.vector()
    thrust_max = env.vessel_params.thrust_max
    transitions = []
    result = None
    while not env.done:
        if random_actions:
            a = rng.uniform(-1.0, 1.0, size=ACT_DIM)
        else:
            a = policy.act_array(obs_vec, deterministic=False, rng=rng)
        result = env.step(ControlInput(float(a[0]) * thrust_max, float(a[1])))
        next_vec = result.observation.vector()
        # Horizon truncation bootstraps; only true terminals cut the value tail.
        transitions.append((obs_vec, a, result.reward, next_vec, result.terminated))
        obs_vec = next_vec
    return transitions, env.episode_return(), env.steps, _episode_outcome(result.info, result.truncated)


def run_policy_episode(env: ShipEnv, policy, seed: int) -> tuple[float, int, str]:
    """Deterministic-policy episode; returns (return, length, outcome)."""
    obs = env.reset(seed)
    result = None
    while not env.done:
        result = env.step(policy.act(obs, mode="deterministic"))
        obs = result.observation
    return env.episode_return(), env.steps, _episode_outcome(result.info, result.truncated)


def evaluate_policy(
    policy,
    env_cfg: EnvConfig,
    n_episodes: int,
    seed: int,
    params: Optional[VesselParams] = None,
    writer=None,
) -> EvalStats:
    """Deterministic evaluation on episode seeds seed..seed+n-1.

    params, when given, replaces the vessel parameters at every episode
    start (the robustness-sweep hook); statistics are over undiscounted
    episode returns.
    """
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    env = ShipEnv(env_cfg)
    if writer is not None:
        env.trajectory_writer = writer
    returns = np.empty(n_episodes)
    lengths = np.empty(n_episodes)
    outcomes = []
    for i in range(n_episodes):
        if params is not None:
            env.set_vessel_params(params)
        ep_return, length, outcome = run_policy_episode(env, policy, seed + i)
        returns[i] = ep_return
        lengths[i] = length
        outcomes.append(outcome)
    return EvalStats(
        mean_return=float(np.mean(returns)),
        std_return=float(np.std(returns)),
        success_rate=outcomes.count("goal") / n_episodes,
        collision_rate=outcomes.count("collision") / n_episodes,
        mean_length=float(np.mean(lengths)),
        n_episodes=n_episodes,
    )


def evaluate(checkpoint_path, n_episodes: int, seed: int, config: Optional[FullConfig] = None) -> EvalStats:
    """Evaluate a checkpoint with its embedded environment configuration."""
    agent, meta = load_agent_checkpoint(checkpoint_path)
    if config is not None and config_hash(config) != meta["config_hash"]:
        raise ConfigHashMismatch(
            f"checkpoint was trained under config {meta['config_hash'][:12]}..., "
            f"given config hashes to {config_hash(config)[:12]}...; pass the matching config or none"
        )
    env_cfg = env_config_from_dict(meta["config"]["env"])
    return evaluate_policy(agent.policy_snapshot(), env_cfg, n_episodes, seed)


class ConfigHashMismatch(RuntimeError):
    """Checkpoint and supplied config disagree."""


def _format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_metrics_csv(path, rows: list[dict], chash: str) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(f"# {METRICS_SCHEMA} config_hash={chash}\n")
        fh.write(",".join(METRICS_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(row.get(c)) for c in METRICS_COLUMNS) + "\n")
    return path


def train(cfg: FullConfig, out_dir) -> TrainResult:
    """Run the collect/update loop until the step budget and write artifacts.

    Artifacts under out_dir: checkpoint.npz (final), periodic
    checkpoint_<steps>.npz, metrics.csv, and training_curve.png.
    """
    tcfg = cfg.train
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    chash = config_hash(cfg)

    agent = make_agent(cfg)
    acfg = cfg.sac if tcfg.algo == "sac" else cfg.baseline
    buffer = ReplayBuffer(
        acfg.buffer_capacity,
        cfg.env.obs_dim,
        ACT_DIM,
        np.random.Generator(np.random.PCG64(np.random.SeedSequence((tcfg.seed, 0xBF)))),
    )
    workers = tcfg.workers
    envs = [ShipEnv(cfg.env) for _ in range(workers)]
    rngs = [
        np.random.Generator(np.random.PCG64(np.random.SeedSequence((tcfg.seed, 0x70, w))))
        for w in range(workers)
    ]
    episode_counters = [0] * workers

    rows: list[dict] = []
    steps = 0
    episodes = 0
    last_losses: dict = {}
    final_eval: Optional[EvalStats] = None
    stopped_early = False
    next_checkpoint = tcfg.checkpoint_every if tcfg.checkpoint_every > 0 else None
    next_eval = tcfg.eval_every if tcfg.eval_every > 0 else None
    t_start = time.perf_counter()

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while steps < tcfg.total_steps:
            snapshot = agent.policy_snapshot()
            random_phase = steps < tcfg.start_steps

            def job(w: int):
                seed_ep = derive_seed(tcfg.seed, w, episode_counters[w])
                try:
                    return collect_episode(envs[w], snapshot, seed_ep, rngs[w], random_phase)
                except Exception as e:  # pragma: no cover - diagnostic path
                    raise TrainingError(f"rollout worker {w} failed: {e}") from e

            if pool is not None:
                results = list(pool.map(job, range(workers)))
            else:
                results = [job(0)]

            round_steps = 0
            round_returns = []
            round_lengths = []
            for w, (transitions, ep_return, length, _outcome) in enumerate(results):
                episode_counters[w] += 1
                episodes += 1
                round_returns.append(ep_return)
                round_lengths.append(length)
                for obs_vec, a, r, next_vec, done in transitions:
                    buffer.add(obs_vec, a, r, next_vec, done)
                round_steps += len(transitions)
            steps += round_steps

            if len(buffer) >= tcfg.update_after:
                n_updates = int(round(tcfg.updates_per_step * round_steps))
                losses_acc: dict[str, float] = {}
                for _ in range(n_updates):
                    losses = agent.update(buffer.sample(acfg.batch_size))
                    for k, v in losses.items():
                        losses_acc[k] = losses_acc.get(k, 0.0) + v
                if n_updates:
                    last_losses = {k: v / n_updates for k, v in losses_acc.items()}

            row = {
                "env_steps": steps,
                "episodes": episodes,
                "mean_return": float(np.mean(round_returns)),
                "std_return": float(np.std(round_returns)),
                "episode_len": float(np.mean(round_lengths)),
                "critic_loss": last_losses.get("critic_loss"),
                "actor_loss": last_losses.get("actor_loss"),
                "alpha": last_losses.get("alpha"),
                "entropy": last_losses.get("entropy"),
            }

            if next_eval is not None and steps >= next_eval:
                next_eval += tcfg.eval_every
                final_eval = evaluate_policy(
                    agent.policy_snapshot(), cfg.env, tcfg.eval_episodes, tcfg.eval_seed
                )
                row["eval_mean_return"] = final_eval.mean_return
                row["eval_success_rate"] = final_eval.success_rate
                print(
                    f"  [{tcfg.algo} seed={tcfg.seed}] steps={steps} episodes={episodes} "
                    f"eval_return={final_eval.mean_return:.1f} eval_success={final_eval.success_rate:.2f}",
                    flush=True,
                )
                if tcfg.stop_at_success is not None and final_eval.success_rate >= tcfg.stop_at_success:
                    rows.append(row)
                    stopped_early = True
                    break
            rows.append(row)

            if next_checkpoint is not None and steps >= next_checkpoint:
                next_checkpoint += tcfg.checkpoint_every
                save_agent_checkpoint(
                    out / f"checkpoint_{steps:09d}.npz", agent, cfg, env_steps=steps, rng_states=_rng_states(buffer, rngs)
                )
    finally:
        if pool is not None:
            pool.shutdown()

    checkpoint_path = save_agent_checkpoint(
        out / "checkpoint.npz", agent, cfg, env_steps=steps, rng_states=_rng_states(buffer, rngs)
    )
    metrics_path = write_metrics_csv(out / "metrics.csv", rows, chash)
    try:
        from .plots import plot_training

        plot_training(rows, out / "training_curve.png", algo=tcfg.algo)
    except Exception as e:  # rendering must never fail a run
        print(f"warning: could not render training curve: {e}")

    elapsed = time.perf_counter() - t_start
    print(
        f"trained {tcfg.algo} for {steps} env steps / {episodes} episodes in {elapsed:.1f}s "
        f"-> {checkpoint_path}"
    )
    return TrainResult(
        checkpoint_path=checkpoint_path,
        metrics_path=metrics_path,
        env_steps=steps,
        episodes=episodes,
        final_eval=final_eval,
        stopped_early=stopped_early,
    )


def _rng_states(buffer: ReplayBuffer, rngs) -> dict:
    return {
        "buffer": buffer._rng.bit_generator.state,
        "workers": [r.bit_generator.state for r in rngs],
    }
