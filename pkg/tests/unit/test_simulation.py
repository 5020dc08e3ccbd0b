"""
Tests for simulation module.

Tests scene configuration, scene generation, single trials and sweeps.
"""

import math

import numpy as np
import pytest

from vertical_relpose import simulation
from vertical_relpose.exceptions import InvalidInputError
from vertical_relpose.geometry import is_rotation, rotation_angle_error
from vertical_relpose.pose import epipolar_residual
from vertical_relpose.simulation import (
    CSV_COLUMNS,
    SceneConfig,
    generate_scene,
    run_noise_sweep,
    run_planar_sweep,
    run_trial,
    run_vertical_sweep,
    sweep_levels,
)


class TestSceneConfig:
    """Tests for SceneConfig"""

    def test_defaults(self):
        """Defaults describe the 352x288, 45 degree benchmark camera"""
        cfg = SceneConfig()
        assert (cfg.width, cfg.height, cfg.fov) == (352, 288, 45.0)
        assert cfg.trials == 2500
        assert cfg.motion == "sideway"

    @pytest.mark.parametrize("kwargs", [
        {"motion": "diagonal"},
        {"baseline": 0.0},
        {"fov": 180.0},
        {"depth_min": 3.0, "depth_max": 2.0},
        {"sigma": -0.1},
        {"trials": 0},
        {"points": 2},
        {"max_yaw": 180.0},
    ])
    def test_rejects_invalid(self, kwargs):
        """Out-of-range parameters raise InvalidInputError"""
        with pytest.raises(InvalidInputError):
            SceneConfig(**kwargs)

    def test_from_dict(self):
        """Known keys are applied"""
        cfg = SceneConfig.from_dict({"motion": "forward", "sigma": 0.5, "trials": 4})
        assert cfg.motion == "forward"
        assert cfg.sigma == 0.5
        assert cfg.trials == 4

    def test_from_dict_unknown_key(self):
        """Unknown keys are named in the error"""
        with pytest.raises(InvalidInputError) as exc_info:
            SceneConfig.from_dict({"sigmaa": 0.5})
        assert "sigmaa" in str(exc_info.value)

    def test_with_overrides_skips_none(self):
        """None overrides keep the current value"""
        cfg = SceneConfig(sigma=0.3).with_overrides(sigma=None, trials=5)
        assert cfg.sigma == 0.3
        assert cfg.trials == 5

    def test_dict_round_trip(self):
        """to_dict feeds back into from_dict"""
        cfg = SceneConfig(motion="forward", planar=True, seed=42)
        assert SceneConfig.from_dict(cfg.to_dict()) == cfg

    def test_intrinsics(self):
        """Focal length follows from the field of view"""
        K = SceneConfig().intrinsics()
        assert K.focal == pytest.approx(176.0 / math.tan(math.radians(22.5)))


class TestGenerateScene:
    """Tests for generate_scene"""

    def test_point_count(self, sideway_instance):
        """The requested number of points is visible"""
        assert len(sideway_instance.correspondences) == 8
        assert len(sideway_instance.pixels) == 8
        assert sideway_instance.world_points.shape == (8, 3)

    def test_ground_truth_is_a_pose(self, sideway_instance):
        """Rotation is proper and the baseline has unit length"""
        assert is_rotation(sideway_instance.rotation)
        assert np.linalg.norm(sideway_instance.translation) == pytest.approx(1.0)

    def test_noiseless_epipolar(self, sideway_instance):
        """Exact correspondences satisfy the true epipolar geometry"""
        for c in sideway_instance.correspondences:
            assert epipolar_residual(sideway_instance.pose, c) < 1e-12

    def test_points_inside_both_images(self, sideway_instance):
        """Both projections lie inside the image"""
        for p1, p2 in sideway_instance.pixels:
            assert 0 <= p1.u <= 352 and 0 <= p1.v <= 288
            assert 0 <= p2.u <= 352 and 0 <= p2.v <= 288

    def test_depth_range(self, sideway_instance):
        """Depths are drawn in [0.5, 2.5]"""
        z = sideway_instance.world_points[:, 2]
        assert np.all((z >= 0.5) & (z <= 2.5))

    def test_planar_depth(self):
        """Planar scenes put every point at Z = 2"""
        instance = generate_scene(SceneConfig(planar=True))
        np.testing.assert_allclose(instance.world_points[:, 2], 2.0)

    def test_verticals_within_tilt(self, sideway_instance):
        """Camera verticals are within 10 degrees per axis of the image Y"""
        for v in (sideway_instance.vertical1, sideway_instance.vertical2):
            assert np.linalg.norm(v) == pytest.approx(1.0)
            assert math.degrees(math.acos(v[1])) <= 10.0 * math.sqrt(2) + 1e-9

    def test_yaw_bound(self, scene_config):
        """Relative rotation angle stays within yaw plus both tilts"""
        for k in range(5):
            instance = generate_scene(scene_config, k)
            assert rotation_angle_error(np.eye(3), instance.rotation) < 10.0 + 4 * 10.0

    def test_forward_motion_baseline(self):
        """Forward motion moves the camera along its optical axis"""
        instance = generate_scene(SceneConfig(motion="forward", max_tilt=0.0, max_yaw=0.0))
        np.testing.assert_allclose(np.abs(instance.translation), [0.0, 0.0, 1.0], atol=1e-12)

    def test_sideway_motion_baseline(self):
        """Sideway motion moves the camera along X"""
        instance = generate_scene(SceneConfig(max_tilt=0.0, max_yaw=0.0))
        np.testing.assert_allclose(np.abs(instance.translation), [1.0, 0.0, 0.0], atol=1e-12)

    def test_reproducible(self, scene_config):
        """Same seed and trial give the same scene"""
        a = generate_scene(scene_config, 3)
        b = generate_scene(scene_config, 3)
        np.testing.assert_array_equal(a.world_points, b.world_points)
        np.testing.assert_array_equal(a.rotation, b.rotation)

    def test_trials_differ(self, scene_config):
        """Different trials give different scenes"""
        a = generate_scene(scene_config, 0)
        b = generate_scene(scene_config, 1)
        assert not np.array_equal(a.world_points, b.world_points)

    def test_noise_reuses_scene(self):
        """Changing sigma keeps the geometry and scales the pixel offsets"""
        a = generate_scene(SceneConfig(sigma=0.5))
        b = generate_scene(SceneConfig(sigma=1.0))
        np.testing.assert_array_equal(a.world_points, b.world_points)
        da = a.noisy_pixels[0][0].u - a.pixels[0][0].u
        db = b.noisy_pixels[0][0].u - b.pixels[0][0].u
        assert db == pytest.approx(2.0 * da)

    def test_vertical_error_angle(self):
        """Measured verticals are off by exactly the requested angle"""
        instance = generate_scene(SceneConfig(vertical_error=0.3))
        for v, m in ((instance.vertical1, instance.measured_vertical1),
                     (instance.vertical2, instance.measured_vertical2)):
            angle = math.degrees(math.atan2(np.linalg.norm(np.cross(v, m)), v @ m))
            assert angle == pytest.approx(0.3)

    def test_not_enough_visible_points(self):
        """A baseline that leaves the field of view raises"""
        with pytest.raises(InvalidInputError):
            generate_scene(SceneConfig(baseline=100.0, points=8))


class TestRunTrial:
    """Tests for run_trial"""

    def test_noiseless_trial(self, sideway_instance):
        """Noise-free data recovers the pose"""
        outcome = run_trial(sideway_instance)
        assert not outcome.failed
        assert outcome.rotation_error < 1e-6
        assert outcome.translation_error < 1e-6
        assert outcome.solve_seconds > 0

    def test_forward_trial(self):
        """Forward motion is solved as well"""
        outcome = run_trial(generate_scene(SceneConfig(motion="forward"), 2))
        assert outcome.rotation_error < 1e-6

    def test_linear_algebra_failure_is_a_failed_trial(self, sideway_instance, monkeypatch):
        """A LinAlgError from the solver fails the trial instead of the sweep"""
        def singular(*args, **kwargs):
            raise np.linalg.LinAlgError("Singular matrix")

        monkeypatch.setattr(simulation, "solve_system", singular)
        outcome = run_trial(sideway_instance)
        assert outcome.failed
        assert math.isnan(outcome.rotation_error)


class TestSweeps:
    """Tests for sweep helpers and sweeps"""

    def test_sweep_levels(self):
        """Levels run from 0 to the maximum in exact steps"""
        assert sweep_levels(1.0, 0.2) == [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
        assert sweep_levels(0.5, 0.1) == [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]

    def test_sweep_levels_rejects_zero_step(self):
        """Zero step raises"""
        with pytest.raises(InvalidInputError):
            sweep_levels(1.0, 0.0)

    def test_zero_noise_row(self, scene_config):
        """At sigma = 0 every trial succeeds with negligible error"""
        record = run_noise_sweep(scene_config, [0.0])
        row = record.rows[0]
        assert row.failures == 0
        assert row.median_rot_err_deg < 1e-6
        assert row.median_trans_err_deg < 1e-6
        assert row.mean_solve_us > 0

    def test_noise_sweep_rows(self, scene_config):
        """One row per level with the level echoed"""
        record = run_noise_sweep(scene_config.with_overrides(trials=3), [0.0, 0.5])
        assert record.parameter == "sigma"
        assert record.levels == [0.0, 0.5]
        assert len(record.rows[0].as_tuple()) == len(CSV_COLUMNS)

    def test_timing_disabled(self, scene_config):
        """timing=False leaves the timing column NaN"""
        record = run_noise_sweep(scene_config.with_overrides(trials=2), [0.0], timing=False)
        assert math.isnan(record.rows[0].mean_solve_us)

    def test_deterministic_without_timing(self, scene_config):
        """Same config and seed give identical rows"""
        cfg = scene_config.with_overrides(trials=4)
        a = run_noise_sweep(cfg, [0.0, 1.0], timing=False)
        b = run_noise_sweep(cfg, [0.0, 1.0], timing=False)
        assert [r.as_tuple()[:6] for r in a.rows] == [r.as_tuple()[:6] for r in b.rows]

    def test_vertical_sweep_range(self, scene_config):
        """Vertical errors above 0.5 degrees are rejected"""
        with pytest.raises(InvalidInputError):
            run_vertical_sweep(scene_config, [0.0, 0.6])

    def test_vertical_sweep(self, scene_config):
        """Vertical error degrades the rotation estimate"""
        record = run_vertical_sweep(scene_config.with_overrides(trials=4), [0.0, 0.5])
        assert record.parameter == "vertical_error"
        assert record.rows[0].median_rot_err_deg < 1e-6
        assert record.rows[1].median_rot_err_deg > record.rows[0].median_rot_err_deg

    def test_planar_sweep(self, scene_config):
        """Planar scenes are solved at zero noise"""
        record = run_planar_sweep(scene_config.with_overrides(trials=3), [0.0])
        assert record.config.planar is True
        assert record.rows[0].median_rot_err_deg < 1e-6

    def test_workers_match_sequential(self, scene_config):
        """Trials in worker processes give the same rows"""
        cfg = scene_config.with_overrides(trials=4)
        a = run_noise_sweep(cfg, [0.0, 1.0], timing=False)
        b = run_noise_sweep(cfg, [0.0, 1.0], timing=False, workers=2)
        assert [r.as_tuple()[:6] for r in a.rows] == [r.as_tuple()[:6] for r in b.rows]
