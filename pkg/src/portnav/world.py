"""Seeded generation and simulation of randomized port scenes.

A scene is a rectangular basin whose boundary is exposed as wall segments.
Quay fingers (rectangles flush with a wall) and free-standing convex
polygons populate ``static_obstacles``; dynamic obstacles are non-reactive
discs that follow their waypoint route as a closed loop at constant speed.
Generation is rejection sampling driven by a single PCG64 stream, so a
(seed, config) pair always reproduces the identical scene.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull

from . import geometry as geo
from .kinematics import VesselState

SCENE_SCHEMA_VERSION = 1


class GenerationError(RuntimeError):
    """Rejection sampling exhausted its attempt budget for one entity."""


@dataclass
class Goal:
    center: np.ndarray
    radius: float


@dataclass
class DynamicObstacle:
    """Constant-speed disc following its waypoint loop, ignoring the ego.

    route_progress is the normalized arc-length position along the closed
    loop (the final waypoint connects back to the first).
    """

    footprint_radius: float
    route: np.ndarray  # (m, 2) waypoints
    speed: float
    route_progress: float = 0.0

    def __post_init__(self) -> None:
        self.route = np.asarray(self.route, dtype=float)
        if self.route.ndim != 2 or self.route.shape[0] < 2 or self.route.shape[1] != 2:
            raise ValueError("route needs at least 2 planar waypoints")
        if self.speed < 0.0:
            raise ValueError("speed must be >= 0")
        lengths = geo.segment_lengths(self.route, closed=True)
        self._cumlen = np.concatenate([[0.0], np.cumsum(lengths)])

    @property
    def loop_length(self) -> float:
        return float(self._cumlen[-1])

    def position(self) -> np.ndarray:
        """Current point on the route polyline."""
        s = (self.route_progress % 1.0) * self.loop_length
        idx = int(np.searchsorted(self._cumlen, s, side="right")) - 1
        idx = min(idx, len(self.route) - 1)
        seg_len = self._cumlen[idx + 1] - self._cumlen[idx]
        a = self.route[idx]
        b = self.route[(idx + 1) % len(self.route)]
        if seg_len == 0.0:
            return a.copy()
        frac = (s - self._cumlen[idx]) / seg_len
        return a + frac * (b - a)

    def advance(self, dt: float) -> None:
        if self.speed > 0.0 and self.loop_length > 0.0:
            self.route_progress = (self.route_progress + self.speed * dt / self.loop_length) % 1.0


@dataclass
class WorldScene:
    bounds: tuple[float, float, float, float]  # xmin, ymin, xmax, ymax
    wall_segments: np.ndarray  # (S, 2, 2)
    static_obstacles: list[np.ndarray]
    dynamic_obstacles: list[DynamicObstacle]
    goal: Goal
    spawn_pose: VesselState

    @property
    def diagonal(self) -> float:
        xmin, ymin, xmax, ymax = self.bounds
        return math.hypot(xmax - xmin, ymax - ymin)

    # Static geometry never changes after generation, so derived views are
    # computed once per scene.
    def static_segments(self) -> np.ndarray:
        """Walls plus every static-polygon edge as one (S, 2, 2) array."""
        cached = getattr(self, "_static_segments", None)
        if cached is None:
            parts = [self.wall_segments]
            parts.extend(geo.polygon_edges(poly) for poly in self.static_obstacles)
            cached = np.concatenate(parts, axis=0)
            object.__setattr__(self, "_static_segments", cached)
        return cached

    def polygon_cache(self) -> list["_PolyCache"]:
        cached = getattr(self, "_polygon_cache", None)
        if cached is None:
            cached = [_PolyCache.build(poly) for poly in self.static_obstacles]
            object.__setattr__(self, "_polygon_cache", cached)
        return cached


@dataclass
class _PolyCache:
    """Precomputed polygon views for scalar hot paths."""

    verts: list[tuple[float, float]]
    cx: float
    cy: float
    bound: float  # radius of the bounding circle around (cx, cy)

    @classmethod
    def build(cls, poly: np.ndarray) -> "_PolyCache":
        verts = [(float(x), float(y)) for x, y in poly]
        cx = sum(v[0] for v in verts) / len(verts)
        cy = sum(v[1] for v in verts) / len(verts)
        bound = max(math.hypot(vx - cx, vy - cy) for vx, vy in verts)
        return cls(verts, cx, cy, bound)

    def point_within(self, px: float, py: float, r: float) -> bool:
        """Exact test: distance from (px, py) to the polygon <= r."""
        if math.hypot(px - self.cx, py - self.cy) - self.bound > r:
            return False
        if geo.point_in_convex_polygon_xy(px, py, self.verts):
            return True
        k = len(self.verts)
        for i in range(k):
            ax, ay = self.verts[i]
            bx, by = self.verts[(i + 1) % k]
            if geo.point_segment_distance_xy(px, py, ax, ay, bx, by) <= r:
                return True
        return False

    def segment_within(self, ax, ay, bx, by, r: float) -> bool:
        """Exact test: distance from segment ab to the polygon <= r."""
        if geo.point_segment_distance_xy(self.cx, self.cy, ax, ay, bx, by) - self.bound > r:
            return False
        if geo.point_in_convex_polygon_xy(ax, ay, self.verts) or geo.point_in_convex_polygon_xy(bx, by, self.verts):
            return True
        k = len(self.verts)
        for i in range(k):
            cx, cy = self.verts[i]
            dx, dy = self.verts[(i + 1) % k]
            if geo.segments_distance_xy(ax, ay, bx, by, cx, cy, dx, dy) <= r:
                return True
        return False


@dataclass
class GenConfig:
    """Knobs for scene randomization; counts are inclusive (lo, hi) ranges.

    Quay fingers count toward static_obstacles in the produced scene.
    goal_ahead, when set, pins the goal center that many meters ahead of
    the spawn heading instead of sampling it freely.
    """

    width: float = 400.0
    height: float = 400.0
    n_quays: tuple[int, int] = (2, 5)
    quay_width: tuple[float, float] = (20.0, 60.0)
    quay_depth: tuple[float, float] = (15.0, 50.0)
    n_static: tuple[int, int] = (3, 8)
    static_radius: tuple[float, float] = (8.0, 25.0)
    static_vertices: tuple[int, int] = (5, 8)
    n_dynamic: tuple[int, int] = (2, 5)
    dynamic_radius: tuple[float, float] = (4.0, 10.0)
    dynamic_speed: tuple[float, float] = (0.5, 3.0)
    route_waypoints: tuple[int, int] = (3, 5)
    route_min_leg: float = 40.0
    goal_radius: float = 10.0
    min_separation: float = 50.0
    wall_clearance: float = 12.0
    obstacle_clearance: float = 6.0
    spawn_clearance: float = 10.0
    goal_ahead: Optional[float] = None
    max_attempts: int = 1000

    def __post_init__(self) -> None:
        for name in ("n_quays", "n_static", "n_dynamic", "route_waypoints", "static_vertices"):
            lo, hi = getattr(self, name)
            if lo < 0 or hi < lo:
                raise ValueError(f"{name} range ({lo}, {hi}) must be non-empty and non-negative")
        for name in ("quay_width", "quay_depth", "static_radius", "dynamic_radius", "dynamic_speed"):
            lo, hi = getattr(self, name)
            if lo < 0.0 or hi < lo:
                raise ValueError(f"{name} range ({lo}, {hi}) must be non-empty and non-negative")
        if self.width <= 0.0 or self.height <= 0.0:
            raise ValueError("basin dimensions must be positive")
        if self.goal_radius <= 0.0 or self.min_separation < 0.0 or self.max_attempts < 1:
            raise ValueError("goal_radius > 0, min_separation >= 0, max_attempts >= 1 required")

    @classmethod
    def open_water(cls, width: float = 200.0, height: float = 200.0, **overrides) -> "GenConfig":
        """Empty rectangular basin: no quays, no obstacles."""
        base = dict(
            width=width,
            height=height,
            n_quays=(0, 0),
            n_static=(0, 0),
            n_dynamic=(0, 0),
        )
        base.update(overrides)
        return cls(**base)


def _boundary_segments(bounds) -> np.ndarray:
    xmin, ymin, xmax, ymax = bounds
    corners = np.array([[xmin, ymin], [xmax, ymin], [xmax, ymax], [xmin, ymax]])
    return geo.polygon_edges(corners)


def _polygon_clear_of(poly: np.ndarray, caches: list[_PolyCache], clearance: float) -> bool:
    verts = [(float(x), float(y)) for x, y in poly]
    k = len(verts)
    for cache in caches:
        for i in range(k):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % k]
            if cache.segment_within(ax, ay, bx, by, clearance):
                return False
        # Caught by edge tests unless one polygon swallows the other whole.
        if geo.point_in_convex_polygon_xy(cache.cx, cache.cy, verts):
            return False
    return True


def _make_quay(rng: np.random.Generator, cfg: GenConfig) -> np.ndarray:
    side = int(rng.integers(0, 4))
    w = float(rng.uniform(*cfg.quay_width))
    d = float(rng.uniform(*cfg.quay_depth))
    along = cfg.width if side in (0, 2) else cfg.height
    w = min(w, 0.5 * along)
    u = float(rng.uniform(0.0, along - w))
    if side == 0:  # south wall, finger points +y
        return np.array([[u, 0.0], [u + w, 0.0], [u + w, d], [u, d]])
    if side == 2:  # north wall
        return np.array([[u, cfg.height - d], [u + w, cfg.height - d], [u + w, cfg.height], [u, cfg.height]])
    if side == 1:  # east wall, finger points -x
        return np.array([[cfg.width - d, u], [cfg.width, u], [cfg.width, u + w], [cfg.width - d, u + w]])
    return np.array([[0.0, u], [d, u], [d, u + w], [0.0, u + w]])  # west wall


def _make_convex_blob(rng: np.random.Generator, cfg: GenConfig, inset: float) -> Optional[np.ndarray]:
    radius = float(rng.uniform(*cfg.static_radius))
    cx = float(rng.uniform(inset + radius, cfg.width - inset - radius))
    cy = float(rng.uniform(inset + radius, cfg.height - inset - radius))
    k = int(rng.integers(cfg.static_vertices[0], cfg.static_vertices[1] + 1))
    angles = rng.uniform(0.0, 2.0 * math.pi, size=k)
    radii = rng.uniform(0.5 * radius, radius, size=k)
    pts = np.column_stack([cx + radii * np.sin(angles), cy + radii * np.cos(angles)])
    try:
        hull = ConvexHull(pts)
    except Exception:
        return None
    poly = pts[hull.vertices]
    return poly if len(poly) >= 3 else None


def generate(seed: int, cfg: GenConfig) -> WorldScene:
    """Build a scene from a 64-bit seed; identical (seed, cfg) -> identical scene.

    Raises GenerationError naming the first entity that could not be placed
    within cfg.max_attempts rejection-sampling attempts.
    """
    if seed < 0:
        raise ValueError("seed must be a non-negative 64-bit integer")
    rng = np.random.Generator(np.random.PCG64(seed))
    bounds = (0.0, 0.0, cfg.width, cfg.height)
    walls = _boundary_segments(bounds)
    polygons: list[np.ndarray] = []
    caches: list[_PolyCache] = []

    def admit(poly: np.ndarray) -> None:
        polygons.append(poly)
        caches.append(_PolyCache.build(poly))

    n_quays = int(rng.integers(cfg.n_quays[0], cfg.n_quays[1] + 1))
    for i in range(n_quays):
        for _ in range(cfg.max_attempts):
            quay = _make_quay(rng, cfg)
            if _polygon_clear_of(quay, caches, cfg.obstacle_clearance):
                admit(quay)
                break
        else:
            raise GenerationError(f"could not place quay[{i}] after {cfg.max_attempts} attempts (seed={seed})")

    n_static = int(rng.integers(cfg.n_static[0], cfg.n_static[1] + 1))
    for i in range(n_static):
        for _ in range(cfg.max_attempts):
            poly = _make_convex_blob(rng, cfg, cfg.wall_clearance)
            if poly is None:
                continue
            if _polygon_clear_of(poly, caches, cfg.obstacle_clearance):
                admit(poly)
                break
        else:
            raise GenerationError(f"could not place static_obstacle[{i}] after {cfg.max_attempts} attempts (seed={seed})")

    dynamics: list[DynamicObstacle] = []
    n_dynamic = int(rng.integers(cfg.n_dynamic[0], cfg.n_dynamic[1] + 1))
    for i in range(n_dynamic):
        radius = float(rng.uniform(*cfg.dynamic_radius))
        speed = float(rng.uniform(*cfg.dynamic_speed))
        m = int(rng.integers(cfg.route_waypoints[0], cfg.route_waypoints[1] + 1))
        inset = cfg.wall_clearance + radius
        placed = False
        for _ in range(cfg.max_attempts):
            pts = np.column_stack(
                [
                    rng.uniform(inset, cfg.width - inset, size=m),
                    rng.uniform(inset, cfg.height - inset, size=m),
                ]
            )
            legs = np.hypot(*(np.roll(pts, -1, axis=0) - pts).T)
            if np.any(legs < cfg.route_min_leg):
                continue
            clearance = radius + cfg.obstacle_clearance
            coords = [(float(x), float(y)) for x, y in pts]
            ok = not any(
                cache.segment_within(*coords[j], *coords[(j + 1) % m], clearance)
                for j in range(m)
                for cache in caches
            )
            if not ok:
                continue
            dynamics.append(
                DynamicObstacle(
                    footprint_radius=radius,
                    route=pts,
                    speed=speed,
                    route_progress=float(rng.uniform(0.0, 1.0)),
                )
            )
            placed = True
            break
        if not placed:
            raise GenerationError(f"could not place dynamic_obstacle[{i}] after {cfg.max_attempts} attempts (seed={seed})")

    spawn, goal = _place_spawn_and_goal(rng, cfg, caches, dynamics, seed)
    return WorldScene(
        bounds=bounds,
        wall_segments=walls,
        static_obstacles=polygons,
        dynamic_obstacles=dynamics,
        goal=goal,
        spawn_pose=spawn,
    )


def _free_for_point(p, cfg: GenConfig, caches, dynamics, clearance: float) -> bool:
    xmin, ymin = cfg.wall_clearance, cfg.wall_clearance
    xmax, ymax = cfg.width - cfg.wall_clearance, cfg.height - cfg.wall_clearance
    if not (xmin <= p[0] <= xmax and ymin <= p[1] <= ymax):
        return False
    px, py = float(p[0]), float(p[1])
    if any(cache.point_within(px, py, clearance) for cache in caches):
        return False
    for dyn in dynamics:
        if np.hypot(*(p - dyn.position())) <= dyn.footprint_radius + clearance:
            return False
    return True


def _place_spawn_and_goal(rng, cfg: GenConfig, caches, dynamics, seed) -> tuple[VesselState, Goal]:
    lo = cfg.wall_clearance
    for _ in range(cfg.max_attempts):
        pos = np.array(
            [rng.uniform(lo, cfg.width - lo), rng.uniform(lo, cfg.height - lo)]
        )
        heading = float(rng.uniform(0.0, 360.0))
        if not _free_for_point(pos, cfg, caches, dynamics, cfg.spawn_clearance):
            continue
        if cfg.goal_ahead is not None:
            h = math.radians(heading)
            center = pos + cfg.goal_ahead * np.array([math.sin(h), math.cos(h)])
            if not _free_for_point(center, cfg, caches, dynamics, cfg.spawn_clearance):
                continue
            if np.hypot(*(center - pos)) < cfg.min_separation:
                continue
            spawn = VesselState(float(pos[0]), float(pos[1]), heading, 0.0, 0.0)
            return spawn, Goal(center=center, radius=cfg.goal_radius)
        for _ in range(cfg.max_attempts):
            center = np.array(
                [rng.uniform(lo, cfg.width - lo), rng.uniform(lo, cfg.height - lo)]
            )
            if not _free_for_point(center, cfg, caches, dynamics, cfg.spawn_clearance):
                continue
            if np.hypot(*(center - pos)) < cfg.min_separation:
                continue
            spawn = VesselState(float(pos[0]), float(pos[1]), heading, 0.0, 0.0)
            return spawn, Goal(center=center, radius=cfg.goal_radius)
    entity = "spawn/goal pair" if cfg.goal_ahead is not None else "goal"
    raise GenerationError(f"could not place {entity} after {cfg.max_attempts} attempts (seed={seed})")


def advance_dynamics(scene: WorldScene, dt: float) -> WorldScene:
    """Move every dynamic obstacle dt seconds along its loop; returns the scene."""
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    for dyn in scene.dynamic_obstacles:
        dyn.advance(dt)
    return scene


def check_collision(scene: WorldScene, pose: VesselState, footprint_radius: float) -> bool:
    """True iff the ego disc touches walls, obstacles, or leaves the basin."""
    if footprint_radius <= 0.0:
        raise ValueError("footprint_radius must be > 0")
    px, py = pose.x, pose.y
    xmin, ymin, xmax, ymax = scene.bounds
    if not (xmin <= px <= xmax and ymin <= py <= ymax):
        return True
    if geo.point_segments_distance((px, py), scene.static_segments()) <= footprint_radius:
        return True
    # Edge distances miss a disc buried deep inside a polygon interior.
    for cache in scene.polygon_cache():
        if math.hypot(px - cache.cx, py - cache.cy) <= cache.bound and geo.point_in_convex_polygon_xy(
            px, py, cache.verts
        ):
            return True
    for dyn in scene.dynamic_obstacles:
        pos = dyn.position()
        if math.hypot(px - pos[0], py - pos[1]) <= footprint_radius + dyn.footprint_radius:
            return True
    return False


def check_goal(scene: WorldScene, pose: VesselState) -> bool:
    """True iff the ego position lies within the (closed) goal disc."""
    return bool(np.hypot(pose.x - scene.goal.center[0], pose.y - scene.goal.center[1]) <= scene.goal.radius)


def scene_to_dict(scene: WorldScene) -> dict:
    """JSON-ready description of a scene (schema_version included)."""
    return {
        "schema_version": SCENE_SCHEMA_VERSION,
        "bounds": list(scene.bounds),
        "wall_segments": scene.wall_segments.tolist(),
        "static_obstacles": [poly.tolist() for poly in scene.static_obstacles],
        "dynamic_obstacles": [
            {
                "footprint_radius": dyn.footprint_radius,
                "route": dyn.route.tolist(),
                "speed": dyn.speed,
                "route_progress": dyn.route_progress,
            }
            for dyn in scene.dynamic_obstacles
        ],
        "goal": {"center": scene.goal.center.tolist(), "radius": scene.goal.radius},
        "spawn_pose": {
            "x": scene.spawn_pose.x,
            "y": scene.spawn_pose.y,
            "heading": scene.spawn_pose.heading,
            "speed": scene.spawn_pose.speed,
            "angular_rate": scene.spawn_pose.angular_rate,
        },
    }


def scene_from_dict(data: dict) -> WorldScene:
    version = data.get("schema_version")
    if version != SCENE_SCHEMA_VERSION:
        raise ValueError(f"unsupported scene schema_version {version!r}")
    return WorldScene(
        bounds=tuple(data["bounds"]),
        wall_segments=np.asarray(data["wall_segments"], dtype=float),
        static_obstacles=[np.asarray(p, dtype=float) for p in data["static_obstacles"]],
        dynamic_obstacles=[
            DynamicObstacle(
                footprint_radius=d["footprint_radius"],
                route=np.asarray(d["route"], dtype=float),
                speed=d["speed"],
                route_progress=d["route_progress"],
            )
            for d in data["dynamic_obstacles"]
        ],
        goal=Goal(center=np.asarray(data["goal"]["center"], dtype=float), radius=data["goal"]["radius"]),
        spawn_pose=VesselState(**data["spawn_pose"]),
    )
