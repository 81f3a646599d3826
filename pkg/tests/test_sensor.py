import numpy as np
import pytest

from portnav.kinematics import VesselState
from portnav.sensor import RangeScan, SensorConfig, ray_angles, scan
from portnav.world import DynamicObstacle, GenConfig, Goal, WorldScene, generate

from reference import scan_reference


def empty_scene(width=200.0, height=200.0) -> WorldScene:
    return generate(0, GenConfig.open_water(width, height))


def make_scene(walls, statics=(), dynamics=(), size=1000.0) -> WorldScene:
    return WorldScene(
        bounds=(-size, -size, size, size),
        wall_segments=np.asarray(walls, dtype=float).reshape(-1, 2, 2),
        static_obstacles=[np.asarray(p, dtype=float) for p in statics],
        dynamic_obstacles=list(dynamics),
        goal=Goal(center=np.array([0.0, 0.0]), radius=1.0),
        spawn_pose=VesselState(0, 0, 0, 0, 0),
    )


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SensorConfig(n_rays=0)
        with pytest.raises(ValueError):
            SensorConfig(fov=0.0)
        with pytest.raises(ValueError):
            SensorConfig(fov=361.0)
        with pytest.raises(ValueError):
            SensorConfig(noise_std=-1.0)

    def test_single_ray_points_along_heading(self):
        assert ray_angles(33.0, SensorConfig(n_rays=1)) == pytest.approx([33.0])

    def test_fan_spans_fov(self):
        angles = ray_angles(90.0, SensorConfig(n_rays=5, fov=90.0))
        assert angles == pytest.approx([45.0, 67.5, 90.0, 112.5, 135.0])


class TestScan:
    def test_far_walls_give_max_range(self):
        # Walls beyond max_range on every side.
        scene = make_scene([[[-900, -900], [900, -900]], [[-900, 900], [900, 900]]])
        cfg = SensorConfig(max_range=100.0)
        s = scan(scene, VesselState(0, 0, 0, 0, 0), cfg)
        assert np.all(s.ranges == 100.0)

    def test_perpendicular_wall_distance(self):
        # Wall crossing +y at 40 m; single ray along heading 0 (= +y).
        scene = make_scene([[[-50, 40], [50, 40]]])
        cfg = SensorConfig(n_rays=1, max_range=200.0)
        s = scan(scene, VesselState(0, 0, 0, 0, 0), cfg)
        assert s.ranges[0] == pytest.approx(40.0, abs=1e-12)

    def test_dynamic_obstacle_disc_hit(self):
        dyn = DynamicObstacle(footprint_radius=5.0, route=[[0.0, 30.0], [0.0, 40.0]], speed=0.0)
        scene = make_scene([], dynamics=[dyn])
        cfg = SensorConfig(n_rays=1, max_range=200.0)
        s = scan(scene, VesselState(0, 0, 0, 0, 0), cfg)
        assert s.ranges[0] == pytest.approx(25.0, abs=1e-12)

    def test_ranges_in_contract_interval(self):
        scene = generate(4, GenConfig())
        cfg = SensorConfig()
        s = scan(scene, scene.spawn_pose, cfg)
        assert s.ranges.shape == (cfg.n_rays,)
        assert np.all(s.ranges > 0.0)
        assert np.all(s.ranges <= cfg.max_range)

    def test_matches_brute_force_oracle(self):
        cfg = SensorConfig()
        worst = 0.0
        for seed in range(40):
            scene = generate(seed, GenConfig())
            got = scan(scene, scene.spawn_pose, cfg).ranges
            want = scan_reference(scene, scene.spawn_pose, cfg)
            worst = max(worst, float(np.max(np.abs(got - want))))
        assert worst <= 1e-9

    def test_monotone_under_added_obstacle(self):
        cfg = SensorConfig()
        for seed in range(10):
            scene = generate(seed, GenConfig.open_water(400.0, 400.0))
            base = scan(scene, scene.spawn_pose, cfg).ranges
            blocked = WorldScene(
                bounds=scene.bounds,
                wall_segments=scene.wall_segments,
                static_obstacles=list(scene.static_obstacles),
                dynamic_obstacles=[
                    DynamicObstacle(footprint_radius=8.0, route=[[150.0, 150.0], [250.0, 250.0]], speed=0.0)
                ],
                goal=scene.goal,
                spawn_pose=scene.spawn_pose,
            )
            after = scan(blocked, scene.spawn_pose, cfg).ranges
            assert np.all(after <= base + 1e-12)

    def test_rotation_equivariance(self):
        # Rotating scene and pose together about the ego leaves ranges fixed.
        cfg = SensorConfig()
        rng = np.random.default_rng(5)
        for seed in range(10):
            scene = generate(seed, GenConfig())
            pose = scene.spawn_pose
            phi = float(rng.uniform(0.0, 360.0))
            rotated = rotate_scene_about(scene, (pose.x, pose.y), phi)
            pose_rot = VesselState(pose.x, pose.y, (pose.heading + phi) % 360.0, 0.0, 0.0)
            a = scan(scene, pose, cfg).ranges
            b = scan(rotated, pose_rot, cfg).ranges
            assert np.max(np.abs(a - b)) <= 1e-9

    def test_noise_requires_rng_and_stays_in_bounds(self):
        scene = empty_scene()
        cfg = SensorConfig(noise_std=5.0)
        with pytest.raises(ValueError):
            scan(scene, scene.spawn_pose, cfg)
        rng = np.random.default_rng(0)
        s = scan(scene, scene.spawn_pose, cfg, rng)
        assert np.all(s.ranges > 0.0)
        assert np.all(s.ranges <= cfg.max_range)

    def test_noise_zero_is_pure(self):
        scene = empty_scene()
        cfg = SensorConfig()
        a = scan(scene, scene.spawn_pose, cfg).ranges
        b = scan(scene, scene.spawn_pose, cfg).ranges
        assert np.array_equal(a, b)


def rotate_scene_about(scene: WorldScene, center, phi_deg: float) -> WorldScene:
    """Rigidly rotate all scene geometry about a point (test helper)."""
    phi = np.radians(phi_deg)
    # Compass rotation: headings grow clockwise, so world coordinates rotate
    # by -phi in the usual math convention.
    c, s = np.cos(-phi), np.sin(-phi)
    rot = np.array([[c, -s], [s, c]])
    cx, cy = center

    def rp(pts):
        pts = np.asarray(pts, dtype=float)
        return (pts - [cx, cy]) @ rot.T + [cx, cy]

    return WorldScene(
        bounds=scene.bounds,  # bounds stay; walls are rotated explicitly
        wall_segments=rp(scene.wall_segments.reshape(-1, 2)).reshape(-1, 2, 2),
        static_obstacles=[rp(p) for p in scene.static_obstacles],
        dynamic_obstacles=[
            DynamicObstacle(
                footprint_radius=d.footprint_radius,
                route=rp(d.route),
                speed=d.speed,
                route_progress=d.route_progress,
            )
            for d in scene.dynamic_obstacles
        ],
        goal=Goal(center=rp(scene.goal.center[None, :])[0], radius=scene.goal.radius),
        spawn_pose=scene.spawn_pose,
    )
