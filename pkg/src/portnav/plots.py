"""Figure rendering for sweep curves, training metrics, and scene top-downs.

All entry points write image files (headless Agg backend) next to the
delimited outputs they illustrate.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .sweep import SweepCurve
from .world import WorldScene

PARAM_LABELS = {"mass": "vessel mass [kg]", "turn_rate": "turn rate [deg/s^2 per unit rudder]"}


def plot_sweep(curve: SweepCurve, path, title: str | None = None) -> Path:
    """Mean-return line with a +-1 std band; log x-axis for turn-rate sweeps."""
    values = np.array([p.value for p in curve.points])
    mean = np.array([p.mean_return for p in curve.points])
    std = np.array([p.std_return for p in curve.points])

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(values, mean, marker="o", color="tab:blue", label="mean return")
    ax.fill_between(values, mean - std, mean + std, alpha=0.25, color="tab:blue", label="+-1 std")
    ax.axvline(curve.nominal, color="black", linewidth=2.0, label=f"nominal = {curve.nominal:g}")
    if curve.param == "turn_rate":
        ax.set_xscale("log")
    ax.set_xlabel(PARAM_LABELS.get(curve.param, curve.param))
    ax.set_ylabel("mean return")
    ax.set_title(title or f"Return vs {curve.param}")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def plot_training(rows: list[dict], path, algo: str = "") -> Path:
    """Mean episode return (and eval return when present) over env steps."""
    steps = [r["env_steps"] for r in rows]
    mean = [r["mean_return"] for r in rows]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(steps, mean, color="tab:blue", alpha=0.5, label="train return (per round)")
    if len(mean) >= 5:
        k = max(1, len(mean) // 20)
        kernel = np.ones(k) / k
        smooth = np.convolve(mean, kernel, mode="valid")
        ax.plot(steps[k - 1 :], smooth, color="tab:blue", label="train return (smoothed)")
    ev = [(r["env_steps"], r["eval_mean_return"]) for r in rows if r.get("eval_mean_return") is not None]
    if ev:
        ax.plot(*zip(*ev), color="tab:orange", marker="o", label="eval return")
    ax.set_xlabel("environment steps")
    ax.set_ylabel("mean return")
    ax.set_title(f"Training progress{f' ({algo})' if algo else ''}")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def plot_scene(scene: WorldScene, path, trace=None, title: str | None = None) -> Path:
    """Top-down view: walls, obstacles, dynamic routes, goal, and ego trace."""
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    for seg in scene.wall_segments:
        ax.plot(seg[:, 0], seg[:, 1], color="black", linewidth=1.5)
    for poly in scene.static_obstacles:
        closed = np.vstack([poly, poly[:1]])
        ax.fill(closed[:, 0], closed[:, 1], color="0.6", edgecolor="0.3")
    cmap = plt.get_cmap("tab10")
    for i, dyn in enumerate(scene.dynamic_obstacles):
        route = np.vstack([dyn.route, dyn.route[:1]])
        color = cmap(i % 10)
        ax.plot(route[:, 0], route[:, 1], color=color, linestyle="--", linewidth=1.0)
        pos = dyn.position()
        ax.add_patch(plt.Circle(pos, dyn.footprint_radius, color=color, alpha=0.6))
    ax.add_patch(plt.Circle(scene.goal.center, scene.goal.radius, color="tab:green", alpha=0.4))
    ax.plot(*scene.goal.center, marker="*", color="tab:green", markersize=12)
    sp = scene.spawn_pose
    ax.plot(sp.x, sp.y, marker="^", color="tab:blue", markersize=10)
    if trace is not None and len(trace):
        trace = np.asarray(trace)
        ax.plot(trace[:, 0], trace[:, 1], color="tab:blue", linewidth=1.5)
    xmin, ymin, xmax, ymax = scene.bounds
    ax.set_xlim(xmin - 10, xmax + 10)
    ax.set_ylim(ymin - 10, ymax + 10)
    ax.set_aspect("equal")
    ax.set_title(title or "Scene")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)
