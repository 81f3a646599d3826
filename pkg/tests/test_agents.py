import math

import numpy as np
import pytest

from portnav.agents import (
    ACT_DIM,
    BaselineAgent,
    BaselineConfig,
    ReplayBuffer,
    SacAgent,
    SacConfig,
    ScriptedAgent,
    UpdateError,
    scripted_pursuit,
)
from portnav.config import load_config
from portnav.env import Observation, ShipEnv
from portnav.sensor import SensorConfig
from portnav.trainer import evaluate_policy

OBS_DIM = 12  # 8 rays + 4 features
THRUST_MAX = 400_000.0


def tiny_sac(obs_dim=OBS_DIM, seed=0, **cfg_kwargs) -> SacAgent:
    kwargs = dict(hidden=(16, 16), batch_size=16, buffer_capacity=1000)
    kwargs.update(cfg_kwargs)
    return SacAgent(obs_dim, THRUST_MAX, 0.99, SacConfig(**kwargs), seed)


def tiny_baseline(obs_dim=OBS_DIM, seed=0, **cfg_kwargs) -> BaselineAgent:
    kwargs = dict(hidden=(16, 16), batch_size=16, buffer_capacity=1000)
    kwargs.update(cfg_kwargs)
    return BaselineAgent(obs_dim, THRUST_MAX, 0.99, BaselineConfig(**kwargs), seed)


def fake_obs(obs_dim=OBS_DIM, seed=0) -> Observation:
    rng = np.random.default_rng(seed)
    vec = np.concatenate(
        [
            rng.uniform(0.05, 1.0, size=obs_dim - 4),
            [rng.uniform(0, 1), rng.uniform(-180, 179), rng.uniform(-1, 1), rng.uniform(-1, 1)],
        ]
    )
    return Observation.from_vector(vec)


def random_batch(obs_dim=OBS_DIM, n=16, seed=0, reward=None, done=None) -> dict:
    rng = np.random.default_rng(seed)
    return {
        "obs": rng.normal(size=(n, obs_dim)),
        "act": rng.uniform(-1, 1, size=(n, ACT_DIM)),
        "rew": np.full(n, reward) if reward is not None else rng.normal(size=n),
        "next_obs": rng.normal(size=(n, obs_dim)),
        "done": np.full(n, float(done)) if done is not None else rng.integers(0, 2, size=n).astype(float),
    }


class TestAct:
    @pytest.mark.parametrize("make", [tiny_sac, tiny_baseline])
    def test_actions_within_bounds(self, make):
        agent = make()
        rng = np.random.default_rng(1)
        for seed in range(20):
            obs = fake_obs(seed=seed)
            for mode in ("stochastic", "deterministic"):
                c = agent.act(obs, mode=mode, rng=rng)
                assert -THRUST_MAX <= c.thrust <= THRUST_MAX
                assert -1.0 <= c.rudder <= 1.0

    @pytest.mark.parametrize("make", [tiny_sac, tiny_baseline])
    def test_deterministic_mode_repeats(self, make):
        agent = make()
        obs = fake_obs(seed=3)
        a = agent.act(obs, mode="deterministic")
        b = agent.act(obs, mode="deterministic")
        assert (a.thrust, a.rudder) == (b.thrust, b.rudder)

    def test_stochastic_mean_matches_deterministic(self):
        # Fresh init keeps mu near zero, so the tanh curvature bias is far
        # below the Monte-Carlo standard error.
        agent = tiny_sac(seed=5)
        obs = fake_obs(seed=5)
        det = agent.act(obs, mode="deterministic")
        rng = np.random.default_rng(99)
        n = 10_000
        samples = np.array([agent.policy_snapshot().act_array(obs.vector(), False, rng) for _ in range(n)])
        for d in range(ACT_DIM):
            se = samples[:, d].std() / math.sqrt(n)
            target = det.rudder if d == 1 else det.thrust / THRUST_MAX
            assert abs(samples[:, d].mean() - target) < 3 * se + 1e-3

    def test_malformed_observation_rejected(self):
        agent = tiny_sac()
        with pytest.raises(ValueError):
            agent.policy_snapshot().act_array(np.zeros(OBS_DIM + 1), True)
        bad = np.zeros(OBS_DIM)
        bad[0] = np.nan
        with pytest.raises(ValueError):
            agent.policy_snapshot().act_array(bad, True)


class TestReplayBuffer:
    def test_ring_capacity(self):
        buf = ReplayBuffer(10, OBS_DIM, ACT_DIM, np.random.default_rng(0))
        for i in range(25):
            buf.add(np.full(OBS_DIM, i), [0, 0], i, np.zeros(OBS_DIM), False)
        assert len(buf) == 10
        assert buf.total_added == 25
        batch = buf.sample(50)
        assert set(batch["rew"].astype(int)) <= set(range(15, 25))

    def test_sampling_uniform(self):
        buf = ReplayBuffer(100, 1, 1, np.random.default_rng(7))
        for i in range(100):
            buf.add([i], [0], i, [0], False)
        counts = np.zeros(100)
        draws = buf.sample(200_000)["rew"].astype(int)
        for d in draws:
            counts[d] += 1
        expected = 2000.0
        assert np.all(np.abs(counts - expected) < 5 * math.sqrt(expected))

    def test_empty_sample_raises(self):
        buf = ReplayBuffer(4, 1, 1, np.random.default_rng(0))
        with pytest.raises(ValueError):
            buf.sample(1)


class TestSacUpdate:
    def test_fixed_point_batch_drives_critics_to_zero(self):
        # Terminal transitions with zero reward: target is exactly 0.
        agent = tiny_sac(seed=2)
        batch = random_batch(seed=2, reward=0.0, done=True)
        y = agent.critic_targets(batch, np.zeros((16, ACT_DIM)))
        assert np.all(y == 0.0)
        first = agent.update(batch)["critic_loss"]
        for _ in range(60):
            last = agent.update(batch)["critic_loss"]
        assert last < first

    def test_critic_gradients_match_finite_differences(self):
        agent = tiny_sac(obs_dim=4, seed=3, hidden=(8, 8))
        batch = random_batch(obs_dim=4, n=8, seed=3)
        s = batch["obs"] * agent.obs_scale
        qin = np.concatenate([s, batch["act"]], axis=1)
        y = np.random.default_rng(4).normal(size=8)
        _, grads = agent.critic_loss_and_grads(qin, y)

        h = 1e-5
        for q, analytic in zip((agent.q1, agent.q2), grads):
            for p, g in zip(q.parameters(), analytic):
                it = np.nditer(p, flags=["multi_index"])
                for _ in it:
                    idx = it.multi_index
                    old = p[idx]
                    p[idx] = old + h
                    up = agent.critic_loss_and_grads(qin, y)[0]
                    p[idx] = old - h
                    down = agent.critic_loss_and_grads(qin, y)[0]
                    p[idx] = old
                    which = 0 if q is agent.q1 else 1
                    num = (up[which] - down[which]) / (2 * h)
                    assert g[idx] == pytest.approx(num, rel=1e-3, abs=1e-6)

    def test_actor_gradients_match_finite_differences(self):
        agent = tiny_sac(obs_dim=4, seed=6, hidden=(8, 8))
        batch = random_batch(obs_dim=4, n=8, seed=6)
        s = batch["obs"] * agent.obs_scale
        eps = np.random.default_rng(7).standard_normal((8, ACT_DIM))
        _, grads, _ = agent.actor_loss_and_grads(s, eps)

        h = 1e-6
        worst = 0.0
        for p, g in zip(agent.actor.parameters(), grads):
            it = np.nditer(p, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                old = p[idx]
                p[idx] = old + h
                up = agent.actor_loss_and_grads(s, eps)[0]
                p[idx] = old - h
                down = agent.actor_loss_and_grads(s, eps)[0]
                p[idx] = old
                num = (up - down) / (2 * h)
                worst = max(worst, abs(g[idx] - num) / max(abs(num), 1e-4))
        assert worst < 1e-3

    def test_alpha_decreases_when_entropy_above_target(self):
        # A huge entropy target forces the gap negative... instead pin the
        # policy entropy above an attainable target and watch alpha drop.
        agent = tiny_sac(seed=8, target_entropy=-10.0)
        batch = random_batch(seed=8)
        a0 = agent.alpha
        losses = agent.update(batch)
        assert losses["entropy"] > -10.0
        assert agent.alpha < a0

    def test_alpha_increases_when_entropy_below_target(self):
        agent = tiny_sac(seed=8, target_entropy=10.0)
        batch = random_batch(seed=8)
        a0 = agent.alpha
        losses = agent.update(batch)
        assert losses["entropy"] < 10.0
        assert agent.alpha > a0

    def test_target_networks_polyak_exact(self):
        agent = tiny_sac(seed=9)
        batch = random_batch(seed=9)
        tau = agent.cfg.tau
        prev_t = [p.copy() for p in agent.q1_target.parameters()]
        agent.update(batch)
        online_new = agent.q1.parameters()
        for t_now, o_new, t_prev in zip(agent.q1_target.parameters(), online_new, prev_t):
            assert np.array_equal(t_now, tau * o_new + (1 - tau) * t_prev)

    def test_large_fixed_alpha_raises_entropy(self):
        agent = tiny_sac(seed=10, init_alpha=50.0, auto_alpha=False, lr=1e-3)
        batch = random_batch(seed=10)
        first = agent.update(batch)["entropy"]
        for _ in range(50):
            last = agent.update(batch)["entropy"]
        assert last > first

    def test_update_determinism(self):
        def run():
            agent = tiny_sac(seed=11)
            out = []
            for i in range(5):
                out.append(agent.update(random_batch(seed=100 + i)))
            return out

        a, b = run(), run()
        for la, lb in zip(a, b):
            assert la == lb

    def test_non_finite_batch_rolls_back(self):
        agent = tiny_sac(seed=12)
        before = [p.copy() for p in agent.actor.parameters()]
        bad = random_batch(seed=12)
        bad["rew"][0] = np.nan
        with pytest.raises(UpdateError):
            agent.update(bad)
        for p, b in zip(agent.actor.parameters(), before):
            assert np.array_equal(p, b)
        assert agent.opt_actor.t == 0


class TestBaselineUpdate:
    def test_losses_finite_and_critic_learns(self):
        agent = tiny_baseline(seed=13)
        batch = random_batch(seed=13, reward=0.0, done=True)
        first = agent.update(batch)["critic_loss"]
        for _ in range(60):
            last = agent.update(batch)["critic_loss"]
        assert last < first

    def test_target_networks_polyak_exact(self):
        agent = tiny_baseline(seed=14)
        batch = random_batch(seed=14)
        tau = agent.cfg.tau
        prev_t = [p.copy() for p in agent.actor_target.parameters()]
        agent.update(batch)
        for t_now, o_new, t_prev in zip(agent.actor_target.parameters(), agent.actor.parameters(), prev_t):
            assert np.array_equal(t_now, tau * o_new + (1 - tau) * t_prev)


class TestScripted:
    def make_obs(self, bearing, forward_clear=1.0, n_rays=8, speed=0.0):
        ranges = np.full(n_rays, 1.0)
        offsets = np.linspace(-180, 180, n_rays)
        ranges[np.abs(offsets) <= 45] = forward_clear
        return Observation(
            normalized_ranges=ranges,
            goal_distance=0.5,
            goal_bearing=bearing,
            speed=speed,
            angular_rate=0.0,
        )

    def test_goal_dead_ahead_clear_water(self):
        cfg = SensorConfig(n_rays=8)
        c = scripted_pursuit(self.make_obs(0.0), THRUST_MAX, cfg)
        assert c.rudder == 0.0
        assert c.thrust > 0.0

    def test_goal_to_port_saturates_rudder(self):
        cfg = SensorConfig(n_rays=8)
        c = scripted_pursuit(self.make_obs(-90.0), THRUST_MAX, cfg)
        assert c.rudder == -1.0

    def test_brakes_when_wall_close_and_fast(self):
        cfg = SensorConfig(n_rays=8)
        c = scripted_pursuit(self.make_obs(0.0, forward_clear=0.05, speed=0.9), THRUST_MAX, cfg)
        assert c.thrust < 0.0

    def test_success_rate_on_open_water(self):
        over = {"world.n_quays": [0, 0], "world.n_static": [0, 0], "world.n_dynamic": [0, 0]}
        cfg = load_config(None, over)
        stats = evaluate_policy(ScriptedAgent(cfg.env), cfg.env, 100, 0)
        assert stats.success_rate >= 0.95


class TestActionFeasibilityInEnv:
    def test_sac_actions_feasible_through_episode(self):
        cfg = load_config(None, {"world.n_static": [0, 0], "world.n_dynamic": [0, 0], "world.n_quays": [0, 0]})
        env = ShipEnv(cfg.env)
        agent = SacAgent(cfg.env.obs_dim, cfg.env.vessel.thrust_max, cfg.env.gamma, SacConfig(hidden=(16, 16)), 0)
        obs = env.reset(0)
        rng = np.random.default_rng(0)
        for _ in range(50):
            if env.done:
                break
            c = agent.act(obs, mode="stochastic", rng=rng)
            assert abs(c.thrust) <= cfg.env.vessel.thrust_max
            assert abs(c.rudder) <= 1.0
            obs = env.step(c).observation
