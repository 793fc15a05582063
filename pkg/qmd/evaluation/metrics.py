"""
Mask scoring and per-run classification
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from qmd import config
from qmd.detector.types import DetectionResult
from qmd.errors import check_same_shape
from qmd.frames import RegionMask
from qmd.synth.generator import GroundTruth


class RunOutcome(str, Enum):
    DETECTION = "detection"
    FALSE_ALARM = "false_alarm"
    MISS = "miss"
    QUIET = "quiet"  # No-change sequence that never stopped


@dataclass
class RunRecord:
    """Classification of one detector run against ground truth"""
    name: str
    outcome: RunOutcome
    stop_frame: Optional[int]
    change_frame: Optional[int]
    change_estimate: Optional[int]
    delay: Optional[int] = None
    f_measure: Optional[float] = None


def precision_recall(mask: RegionMask, gt: RegionMask):
    """(precision, recall) of mask against gt; 0 for an empty denominator"""
    check_same_shape(mask.bits, gt.bits, names=["mask", "gt"])
    hits = float(np.logical_and(mask.bits, gt.bits).sum())
    predicted, actual = mask.area, gt.area
    precision = hits / predicted if predicted else 0.0
    recall = hits / actual if actual else 0.0
    return precision, recall


def f_measure(mask: RegionMask, gt: RegionMask) -> float:
    """
    Harmonic mean of precision and recall

    Two empty masks score 1.0; an empty mask against a nonempty one scores 0.0.
    """
    if mask.is_empty and gt.is_empty:
        return 1.0
    if mask.is_empty or gt.is_empty:
        return 0.0
    p, r = precision_recall(mask, gt)
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


def score_run(result: DetectionResult, gt: GroundTruth, f_min: float = config.F_MEASURE_MIN) -> RunRecord:
    """
    Classify a run as detection, false alarm, miss or quiet

    A stop before the change frame, or at/after it with f-measure below f_min, is a
    false alarm. An accepted stop is a detection with delay stop - change. A change
    sequence that never stops is a miss; a no-change sequence that never stops is quiet.
    """
    change = gt.change_frame
    base = dict(name=gt.name, stop_frame=result.stop_frame, change_frame=change,
                change_estimate=result.change_estimate)

    if not result.stopped:
        outcome = RunOutcome.QUIET if change is None else RunOutcome.MISS
        return RunRecord(outcome=outcome, **base)
    if change is None or result.stop_frame < change:
        return RunRecord(outcome=RunOutcome.FALSE_ALARM, **base)

    score = f_measure(result.mask, gt.mask_at(result.stop_frame))
    if score < f_min:
        return RunRecord(outcome=RunOutcome.FALSE_ALARM, f_measure=score, **base)
    return RunRecord(outcome=RunOutcome.DETECTION, delay=result.stop_frame - change, f_measure=score, **base)
