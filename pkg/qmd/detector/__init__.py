"""
Quickest moving object detectors
"""
from qmd.detector.cache import SequenceCache
from qmd.detector.detectors import (
    DetectorKind,
    StreamDetector,
    baseline_f_detector,
    crossed,
    fast_quickest_detect,
    quickest_detect,
    replay_threshold,
    run_detector,
)
from qmd.detector.fstat import f_statistic
from qmd.detector.types import (
    DetectionResult,
    DetectorConfig,
    FStatistic,
    ResidualSummary,
    TraceRow,
    WindowHypothesis,
)
from qmd.detector.window import window_likelihood

__all__ = [
    "DetectionResult",
    "DetectorConfig",
    "DetectorKind",
    "FStatistic",
    "ResidualSummary",
    "SequenceCache",
    "StreamDetector",
    "TraceRow",
    "WindowHypothesis",
    "baseline_f_detector",
    "crossed",
    "f_statistic",
    "fast_quickest_detect",
    "quickest_detect",
    "replay_threshold",
    "run_detector",
    "window_likelihood",
]
