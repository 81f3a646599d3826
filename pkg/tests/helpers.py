"""Shared test configurations: small, fast scenario presets."""
from portnav.config import FullConfig, load_config

NEAR_GOAL_OVERRIDES = {
    "world.width": 200.0,
    "world.height": 200.0,
    "world.n_quays": [0, 0],
    "world.n_static": [0, 0],
    "world.n_dynamic": [0, 0],
    "world.goal_ahead": 15.0,
    "world.min_separation": 10.0,
    "sensor.n_rays": 16,
    "env.horizon": 150,
    "sac.hidden": [64, 64],
    "sac.batch_size": 128,
    "baseline.hidden": [64, 64],
    "baseline.batch_size": 128,
    "train.workers": 1,
    "train.start_steps": 500,
    "train.update_after": 500,
}

SMALL_PORT_OVERRIDES = {
    "world.width": 250.0,
    "world.height": 250.0,
    "world.n_quays": [1, 2],
    "world.n_static": [2, 3],
    "world.n_dynamic": [1, 2],
    "world.route_waypoints": [3, 4],
    "world.route_min_leg": 25.0,
    "world.min_separation": 60.0,
    "world.max_attempts": 2000,
    "sensor.n_rays": 24,
    "env.horizon": 400,
    "sac.hidden": [128, 128],
    "train.workers": 1,
}


def near_goal_config(**extra) -> FullConfig:
    over = dict(NEAR_GOAL_OVERRIDES)
    over.update(extra)
    return load_config(None, over)


def small_port_config(**extra) -> FullConfig:
    over = dict(SMALL_PORT_OVERRIDES)
    over.update(extra)
    return load_config(None, over)
