"""
Tests for the F statistic, window likelihood and the online detectors
"""
import math

import numpy as np
import pytest

from qmd.detector import (
    DetectionResult,
    DetectorConfig,
    DetectorKind,
    ResidualSummary,
    SequenceCache,
    StreamDetector,
    TraceRow,
    WindowHypothesis,
    baseline_f_detector,
    crossed,
    f_statistic,
    fast_quickest_detect,
    quickest_detect,
    replay_threshold,
    window_likelihood,
)
from qmd.detector.window import propagate_masks
from qmd.errors import ConfigError, WindowError
from qmd.evaluation import f_measure
from qmd.flow.types import FlowField
from qmd.frames import RegionMask


def straight_line_f(fields, k, n):
    """F_{k,n} from raw residual arrays; fields[i] is frame i's residual (i >= 2)"""
    pre = np.concatenate([fields[i].ravel() for i in range(2, k + 1)])
    post = np.concatenate([fields[i].ravel() for i in range(k + 1, n + 1)])
    mu0, var0 = pre.mean(), pre.var()
    mu1, var1 = post.mean(), post.var()
    total = 0.0
    for i in range(k, n + 1):
        r = fields[i]
        total += math.exp(-(np.mean((r - mu1) ** 2) / var1 - np.mean((r - mu0) ** 2) / var0))
    return total


def summary_of(fields):
    summary = ResidualSummary()
    for i, values in fields.items():
        summary.add(i, values, np.ones(values.shape, dtype=bool))
    return summary


class TestFStatistic:

    def test_matches_straight_line_implementation(self, rng):
        for _ in range(50):
            n = int(rng.integers(4, 12))
            k = int(rng.integers(2, n))
            fields = {i: rng.normal(rng.uniform(0, 3), rng.uniform(0.5, 2.0), size=(6, 7)) for i in range(2, n + 1)}
            stat = f_statistic(summary_of(fields), k, n)
            assert stat.value == pytest.approx(straight_line_f(fields, k, n), rel=1e-9)
            assert not stat.floored

    def test_pooled_moments(self, rng):
        fields = {2: rng.normal(size=(4, 4)), 3: rng.normal(3.0, 2.0, size=(4, 4))}
        mean, var = summary_of(fields).pooled(2, 3)
        both = np.concatenate([fields[2].ravel(), fields[3].ravel()])
        assert mean == pytest.approx(both.mean())
        assert var == pytest.approx(both.var())

    def test_constant_residuals_are_floored(self):
        fields = {i: np.zeros((4, 4)) for i in range(2, 6)}
        stat = f_statistic(summary_of(fields), 3, 5)
        assert stat.floored
        assert math.isfinite(stat.value)

    @pytest.mark.parametrize("k,n", [(1, 5), (5, 5), (6, 5)])
    def test_window_range_checked(self, k, n):
        fields = {i: np.zeros((2, 2)) for i in range(2, 6)}
        with pytest.raises(WindowError):
            f_statistic(summary_of(fields), k, n)

    def test_missing_frames_rejected(self):
        fields = {2: np.zeros((2, 2)), 4: np.ones((2, 2))}
        with pytest.raises(WindowError):
            f_statistic(summary_of(fields), 2, 4)


class TestStopRules:

    def test_likelihood_detectors_stop_strictly(self):
        assert not crossed(DetectorKind.FAST, 1.0, 1.0)
        assert crossed(DetectorKind.FULL, 1.0001, 1.0)

    def test_baseline_stops_inclusively(self):
        assert crossed(DetectorKind.BASELINE, 20.0, 20.0)

    def test_nan_never_crosses(self):
        assert not crossed(DetectorKind.FAST, math.nan, -1.0)

    def test_replay_finds_first_crossing_from_frame_three(self):
        trace = [
            TraceRow(1, 0.0, None, 0.0, 0.0),
            TraceRow(2, 0.0, None, 0.0, 0.0),
            TraceRow(3, 0.2, 2, 1.0, 0.0),
            TraceRow(4, 0.9, 3, 5.0, 0.0),
            TraceRow(5, 1.5, 3, 9.0, 0.0),
        ]
        assert replay_threshold(trace, -1.0, DetectorKind.FAST) == (True, 3, 2)
        assert replay_threshold(trace, 0.9, DetectorKind.FAST) == (True, 5, 3)
        assert replay_threshold(trace, 5.0, DetectorKind.BASELINE) == (True, 4, 3)
        assert replay_threshold(trace, 2.0, DetectorKind.FULL) == (False, None, None)


class TestConfig:

    def test_overrides_parse_and_propagate_beta(self):
        cfg = DetectorConfig.from_overrides({"beta": "400", "max_window": "none", "prior_weight": "1.5"})
        assert cfg.flow.beta == 400.0
        assert cfg.noise.beta == 400.0
        assert cfg.max_window is None
        assert cfg.prior_weight == 1.5

    def test_dynamic_range_scales_defaults(self):
        cfg = DetectorConfig.from_overrides({"dynamic_range": "1.0"})
        assert cfg.noise.sigma_bg == pytest.approx(0.1)
        assert cfg.flow.beta == pytest.approx(0.04)

    @pytest.mark.parametrize("overrides", [{"bogus": "1"}, {"pyramid_levels": "x"}, {"jobs": "0"}])
    def test_bad_overrides_rejected(self, overrides):
        with pytest.raises(ConfigError):
            DetectorConfig.from_overrides(overrides)

    def test_hypothesis_window_checked(self):
        with pytest.raises(WindowError):
            WindowHypothesis(k=4, n=4, log_lambda=0.0, mask_n=RegionMask.empty((2, 2)), converged=True)


class TestSequenceCache:

    def test_push_computes_residual_moments(self, small_sequence, fast_config):
        frames, _ = small_sequence
        cache = SequenceCache.from_frames(frames[:4], fast_config)
        assert len(cache) == 4
        assert cache.summary.frames == [2, 3, 4]
        # Noiseless static pre-change frames
        assert cache.summary.means[3] == pytest.approx(0.0, abs=1e-9)
        with pytest.raises(WindowError):
            cache.residual(1)

    def test_frame_shape_checked(self, fast_config):
        from qmd.errors import DimensionMismatchError

        cache = SequenceCache(fast_config)
        cache.push(np.zeros((16, 16)))
        with pytest.raises(DimensionMismatchError):
            cache.push(np.zeros((16, 17)))


class TestWindowLikelihood:

    def test_post_change_window_beats_pre_change_window(self, small_sequence, fast_config):
        frames, gt = small_sequence
        cache = SequenceCache.from_frames(frames, fast_config)
        pre = window_likelihood(cache, 3, 5, fast_config)
        post = window_likelihood(cache, 6, 9, fast_config)
        assert pre.log_lambda == 0.0
        assert pre.mask_n.is_empty
        assert post.log_lambda > pre.log_lambda
        assert post.mask_n.frame_index == 9
        assert f_measure(post.mask_n, gt.mask_at(9)) >= 0.5

    def test_accepts_plain_frame_lists(self, small_sequence, fast_config):
        frames, _ = small_sequence
        hypothesis = window_likelihood(frames[:4], 2, 4, fast_config)
        assert (hypothesis.k, hypothesis.n) == (2, 4)
        assert 1 <= hypothesis.outer_iterations <= fast_config.max_outer_iterations

    @pytest.mark.parametrize("k,n", [(1, 4), (4, 4), (3, 7)])
    def test_bad_window_rejected(self, small_sequence, fast_config, k, n):
        frames, _ = small_sequence
        cache = SequenceCache.from_frames(frames[:5], fast_config)
        with pytest.raises(WindowError):
            window_likelihood(cache, k, n, fast_config)

    def test_likelihood_is_never_negative(self, small_sequence, fast_config):
        frames, _ = small_sequence
        cache = SequenceCache.from_frames(frames, fast_config)
        for k, n in [(2, 4), (4, 7), (6, 8)]:
            hypothesis = window_likelihood(cache, k, n, fast_config)
            assert hypothesis.log_lambda >= 0.0
            if hypothesis.log_lambda == 0.0:
                assert hypothesis.mask_n.is_empty

    def test_object_flows_carry_masks_after_the_first_pass(self, small_sequence, fast_config):
        frames, gt = small_sequence
        cache = SequenceCache.from_frames(frames, fast_config)
        shape = cache.shape
        # Backward flows i -> i-1 of an object moving 2 px per frame to the right
        moving = {i: FlowField(np.full(shape, -2.0), np.zeros(shape)) for i in range(7, 10)}
        still = {i: FlowField.zeros(shape) for i in range(7, 10)}
        mask_n = gt.mask_at(9)

        carried = propagate_masks(cache, mask_n, 6, 9, moving)
        held = propagate_masks(cache, mask_n, 6, 9, still)
        assert sorted(carried) == [7, 8, 9]
        assert carried[7].frame_index == 7
        assert f_measure(carried[7], gt.mask_at(7)) >= 0.85
        assert f_measure(held[7], mask_n) >= 0.95
        assert f_measure(carried[7], mask_n) < 0.9


class TestDetectors:

    def test_fast_detector_evaluates_one_window_per_frame(self, small_sequence, fast_config):
        frames, _ = small_sequence
        result = fast_quickest_detect(frames[:7], math.inf, fast_config)
        assert not result.stopped
        assert [row.evaluations for row in result.trace] == [0, 0, 1, 1, 1, 1, 1]
        assert all(row.millis == 0.0 for row in result.trace)

    def test_full_detector_evaluates_every_candidate(self, small_sequence, fast_config):
        frames, _ = small_sequence
        result = quickest_detect(frames[:6], math.inf, fast_config)
        assert [row.evaluations for row in result.trace] == [0, 0, 1, 2, 3, 4]
        assert result.evaluations == 10

    def test_max_window_caps_candidates(self, fast_config):
        from dataclasses import replace

        detector = StreamDetector(DetectorKind.FULL, replace(fast_config, max_window=2))
        assert list(detector.candidates(9)) == [7, 8]
        assert list(StreamDetector(DetectorKind.FULL, fast_config).candidates(5)) == [2, 3, 4]

    def test_never_stops_before_frame_three(self, small_sequence, fast_config):
        frames, _ = small_sequence
        result = fast_quickest_detect(frames, -math.inf, fast_config)
        assert result.stopped
        assert result.stop_frame == 3
        assert result.mask is not None
        assert len(result.trace) == 3

    def test_baseline_uses_one_window_for_the_mask(self, small_sequence, fast_config):
        frames, _ = small_sequence
        result = baseline_f_detector(frames, 0.0, fast_config)
        assert result.stopped and result.stop_frame == 3
        assert result.evaluations == 1
        assert math.isnan(result.trace[-1].log_lambda)
        assert result.change_estimate == 2

    def test_short_stream_rejected(self, small_sequence, fast_config):
        frames, _ = small_sequence
        with pytest.raises(WindowError):
            fast_quickest_detect(frames[:2], 1.0, fast_config)

    def test_statistics_do_not_depend_on_the_threshold(self, small_sequence, fast_config):
        frames, _ = small_sequence
        a = fast_quickest_detect(frames[:6], math.inf, fast_config)
        b = fast_quickest_detect(frames[:6], 1e9, fast_config)
        assert [r.log_lambda for r in a.trace] == [r.log_lambda for r in b.trace]
        assert [r.k_star for r in a.trace] == [r.k_star for r in b.trace]

    def test_trace_is_the_max_over_recomputed_windows(self, small_sequence, fast_config):
        frames, _ = small_sequence
        result = quickest_detect(frames[:8], math.inf, fast_config)
        cache = SequenceCache.from_frames(frames[:8], fast_config)
        for n in (7, 8):
            values = [window_likelihood(cache, k, n, fast_config).log_lambda for k in range(2, n)]
            row = result.trace[n - 1]
            assert row.log_lambda == pytest.approx(max(values))
            assert values[row.k_star - 2] == pytest.approx(max(values))
        assert result.final_log_lambda == result.trace[-1].log_lambda
        assert DetectionResult(False, None, None, None).final_log_lambda == 0.0
