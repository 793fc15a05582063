"""
Tests for the synthetic sequence generator and benchmark suite
"""
import numpy as np
import pytest

from qmd import config
from qmd.errors import ConfigError
from qmd.synth import SceneGeometry, SynthConfig, generate, suite_configs


class TestGenerate:

    def test_deterministic_in_seed(self, small_synth_config):
        a, gt_a = generate(small_synth_config)
        b, gt_b = generate(small_synth_config)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)
        assert gt_a.change_frame == gt_b.change_frame == 6
        assert gt_a.params == gt_b.params

    def test_masks_follow_the_change(self, small_sequence):
        frames, gt = small_sequence
        assert len(frames) == len(gt.masks) == 10
        assert len(gt.flows) == 9
        assert all(gt.mask_at(i).is_empty for i in range(1, 6))
        assert all(not gt.mask_at(i).is_empty for i in range(6, 11))
        assert gt.mask_at(7).frame_index == 7

    def test_static_scene_is_constant_before_the_change(self, small_sequence):
        frames, _ = small_sequence
        for i in range(1, 5):
            np.testing.assert_allclose(frames[i], frames[0])
        assert np.abs(frames[6] - frames[5]).max() > 0

    def test_object_moves_by_its_velocity(self, small_sequence):
        _, gt = small_sequence
        before = np.argwhere(gt.mask_at(7).bits)[:, 1].mean()
        after = np.argwhere(gt.mask_at(8).bits)[:, 1].mean()
        assert after - before == pytest.approx(2.0, abs=0.6)
        flow = gt.flows[6]
        bits = gt.mask_at(7).bits
        np.testing.assert_allclose(flow.u[bits], 2.0)
        np.testing.assert_allclose(flow.u[~bits], 0.0)

    def test_frame_differences_have_twice_the_noise_variance(self):
        cfg = SynthConfig(width=64, height=64, num_frames=6, change_frame=None, noise_sigma=2.0, seed=3)
        frames, gt = generate(cfg)
        diffs = np.concatenate([(frames[i] - frames[i - 1]).ravel() for i in range(1, 6)])
        assert diffs.var() == pytest.approx(2 * 2.0 ** 2, rel=0.1)
        assert gt.change_frame is None
        assert all(mask.is_empty for mask in gt.masks)

    def test_translation_background_flow(self):
        cfg = SynthConfig(width=48, height=48, num_frames=8, change_frame=5, background_kind="translation",
                          background_velocity=(0.5, -0.25), object_start=(0.4, 0.5), noise_sigma=0.0, seed=9)
        _, gt = generate(cfg)
        flow = gt.flows[0]
        np.testing.assert_allclose(flow.u, 0.5)
        np.testing.assert_allclose(flow.v, -0.25)

    def test_bounce_keeps_the_object_inside(self):
        cfg = SynthConfig(width=48, height=48, num_frames=30, change_frame=3, object_velocity=(4.0, 0.0),
                          object_start=(0.7, 0.5), noise_sigma=0.0, seed=2)
        geometry = SceneGeometry(cfg)
        boxes = geometry.object_boxes(geometry.object_centers())
        assert all(x0 >= 0 and x1 <= cfg.width + 1 for x0, _, x1, _ in boxes.values())
        xs = [c[0] for c in geometry.object_centers()]
        assert min(np.diff(xs)) < 0 < max(np.diff(xs))

    def test_enter_mode_starts_outside(self):
        cfg = SynthConfig(width=64, height=64, num_frames=30, change_frame=10, object_mode="enter",
                          object_velocity=(2.0, 0.0), noise_sigma=0.0, seed=4)
        _, gt = generate(cfg)
        assert gt.mask_at(10).area > 0
        assert gt.mask_at(10).area < gt.mask_at(20).area

    @pytest.mark.parametrize("overrides", [
        {"change_frame": 2},
        {"change_frame": 60},
        {"object_size": 0.6},
        {"background_kind": "zoom"},
        {"object_shape": "star"},
        {"noise_sigma": -1.0},
        {"object_velocity": (0.0, 0.0)},
        {"bounce": False, "object_start": (0.8, 0.5), "object_velocity": (5.0, 0.0)},
    ])
    def test_invalid_configs_rejected(self, overrides):
        cfg = SynthConfig(width=48, height=48, num_frames=60, **{"change_frame": 30, **overrides})
        with pytest.raises(ConfigError):
            generate(cfg)


class TestSuite:

    def test_suite_layout(self):
        configs = suite_configs(seed=0)
        assert len(configs) == config.SUITE_SIZE
        assert sum(c.change_frame is None for c in configs) == config.SUITE_NULL_SEQUENCES
        assert all(config.SUITE_MIN_FRAMES <= c.num_frames <= config.SUITE_MAX_FRAMES for c in configs)
        assert [c.name for c in configs[:3]] == ["seq_00", "seq_01", "seq_02"]
        assert {c.background_kind for c in configs} == {"static", "translation", "affine"}

    def test_change_frames_leave_room(self):
        for c in suite_configs(seed=7):
            if c.change_frame is not None:
                assert 20 <= c.change_frame <= c.num_frames - 30

    def test_deterministic_and_null_only(self):
        assert suite_configs(seed=3) == suite_configs(seed=3)
        nulls = suite_configs(seed=3, null_only=True)
        assert len(nulls) == config.SUITE_NULL_SEQUENCES
        assert all(c.change_frame is None for c in nulls)

    def test_small_suite_renders(self):
        from qmd.synth import benchmark_suite

        suite = benchmark_suite(seed=1, width=48, height=48, size=3, num_null=1, min_frames=60, max_frames=60)
        assert [gt.name for _, gt in suite] == ["seq_00", "seq_01", "seq_02"]
        assert suite[2][1].change_frame is None
        assert all(len(frames) == 60 for frames, _ in suite)
