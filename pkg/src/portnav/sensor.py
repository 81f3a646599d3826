"""Ranging sensor: a fan of rays cast from the ego pose against the scene.

Ray i points at heading - fov/2 + i * fov / (n_rays - 1) (a single ray
points straight along the heading).  Each ray reports the distance to the
nearest wall segment, obstacle-polygon edge, or dynamic-obstacle disc;
misses report exactly max_range.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import geometry as geo
from .kinematics import VesselState
from .world import WorldScene

_MIN_RANGE = 1e-9  # lower clamp keeping noisy ranges strictly positive


@dataclass(frozen=True)
class SensorConfig:
    n_rays: int = 32
    fov: float = 360.0  # degrees, centered on the heading
    max_range: float = 200.0
    noise_std: float = 0.0  # meters of additive Gaussian noise

    def __post_init__(self) -> None:
        if self.n_rays < 1:
            raise ValueError("n_rays must be >= 1")
        if not (0.0 < self.fov <= 360.0):
            raise ValueError("fov must be in (0, 360]")
        if self.max_range <= 0.0:
            raise ValueError("max_range must be > 0")
        if self.noise_std < 0.0:
            raise ValueError("noise_std must be >= 0")


@dataclass
class RangeScan:
    ranges: np.ndarray  # (n_rays,), each in (0, max_range]


def ray_angles(heading: float, cfg: SensorConfig) -> np.ndarray:
    """Absolute compass angles (degrees) of every ray for a given heading."""
    if cfg.n_rays == 1:
        return np.array([heading])
    offsets = -cfg.fov / 2.0 + np.arange(cfg.n_rays) * (cfg.fov / (cfg.n_rays - 1))
    return heading + offsets


def scan(
    scene: WorldScene,
    pose: VesselState,
    cfg: SensorConfig,
    rng: Optional[np.random.Generator] = None,
) -> RangeScan:
    """Cast the ray fan from pose; pure given (scene, pose, cfg) when noise is off."""
    angles = np.radians(ray_angles(pose.heading, cfg))
    dirs = np.column_stack([np.sin(angles), np.cos(angles)])
    origin = np.array([pose.x, pose.y])

    t = geo.rays_segments_hits(origin, dirs, scene.static_segments())
    for dyn in scene.dynamic_obstacles:
        t = np.minimum(t, geo.rays_circle_hits(origin, dirs, dyn.position(), dyn.footprint_radius))
    ranges = np.minimum(t, cfg.max_range)

    if cfg.noise_std > 0.0:
        if rng is None:
            raise ValueError("noise_std > 0 requires an rng for reproducibility")
        ranges = np.clip(ranges + rng.normal(0.0, cfg.noise_std, size=cfg.n_rays), _MIN_RANGE, cfg.max_range)
    return RangeScan(ranges=ranges)
