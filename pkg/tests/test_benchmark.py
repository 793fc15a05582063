"""
Seeded acceptance runs on full-size frames and the benchmark suite

Deselected by default; run with `pytest -m benchmark`.
"""
import math

import numpy as np
import pytest

from qmd import config
from qmd.detector import (
    DetectorConfig,
    SequenceCache,
    fast_quickest_detect,
    quickest_detect,
    window_likelihood,
)
from qmd.evaluation import dominates, f_measure, sweep
from qmd.synth import SynthConfig, benchmark_suite, generate

pytestmark = pytest.mark.benchmark

MID_THRESHOLD = config.DEFAULT_THRESHOLDS[len(config.DEFAULT_THRESHOLDS) // 2]


@pytest.fixture(scope="module")
def suite():
    return benchmark_suite(seed=config.SEED)


@pytest.fixture(scope="module")
def detector_config():
    return DetectorConfig(timing=False)


def test_window_segmentation_on_clean_moving_square(detector_config):
    cfg = SynthConfig(num_frames=14, change_frame=6, object_velocity=(2.0, 0.0), object_start=(0.4, 0.5),
                      noise_sigma=0.0, seed=11, name="square")
    frames, gt = generate(cfg)
    hypothesis = window_likelihood(SequenceCache.from_frames(frames, detector_config), 6, 12, detector_config)
    assert hypothesis.outer_iterations <= 20
    assert f_measure(hypothesis.mask_n, gt.mask_at(12)) >= 0.9


def test_statistic_trace_separates_where_mean_residual_does_not(detector_config):
    cfg = SynthConfig(num_frames=80, change_frame=58, background_kind="translation",
                      background_velocity=(0.5, 0.0), noise_sigma=2.0, seed=58, name="gamma58")
    frames, _ = generate(cfg)
    trace = fast_quickest_detect(frames[:73], math.inf, detector_config).trace
    pre = [r for r in trace if 3 <= r.n < 58]
    pre_max = max(abs(r.log_lambda) for r in pre)
    assert pre_max <= 0.05
    assert trace[72].log_lambda > 10 * pre_max

    pre_res = np.array([r.mean_residual for r in pre])
    post_res = np.array([r.mean_residual for r in trace if r.n >= 58])
    overlap = np.mean((post_res >= pre_res.min()) & (post_res <= pre_res.max()))
    assert overlap >= 0.2


def test_change_time_localization(suite, detector_config):
    hits, total = 0, 0
    for frames, gt in suite:
        if gt.change_frame is None:
            continue
        total += 1
        result = fast_quickest_detect(frames, MID_THRESHOLD, detector_config)
        if result.stopped and abs(result.change_estimate - gt.change_frame) <= 3:
            hits += 1
    assert hits >= 0.8 * total


def test_no_false_alarms_on_null_sequences(suite, detector_config):
    for frames, gt in suite:
        if gt.change_frame is None:
            assert not fast_quickest_detect(frames, MID_THRESHOLD, detector_config).stopped


def test_likelihood_detector_dominates_baseline(suite, detector_config):
    fast = sweep("fast", suite, config.DEFAULT_THRESHOLDS, config=detector_config)
    baseline = sweep("baseline_F", suite, config.DEFAULT_BASELINE_THRESHOLDS, config=detector_config)
    result, rows = dominates(fast.rows, baseline.rows)
    assert rows
    assert result


def test_fast_and_full_stop_together(suite, detector_config):
    change = [(frames, gt) for frames, gt in suite if gt.change_frame is not None][:3]
    for frames, gt in change:
        fast = fast_quickest_detect(frames, MID_THRESHOLD, detector_config)
        full = quickest_detect(frames, MID_THRESHOLD, detector_config)
        assert all(row.evaluations == 1 for row in fast.trace if row.n >= 3)
        cap = detector_config.max_window
        assert all(row.evaluations == min(row.n - 2, cap) for row in full.trace if row.n >= 3)
        assert fast.stopped == full.stopped
        if fast.stopped:
            assert abs(fast.stop_frame - full.stop_frame) <= 2
