"""
Threshold sweeps: empirical ADD / FAR over a suite of sequences
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from qmd import config as defaults
from qmd.detector.detectors import DetectorKind, StreamDetector, replay_threshold
from qmd.detector.types import DetectionResult, DetectorConfig, TraceRow
from qmd.errors import ConfigError
from qmd.evaluation.metrics import RunOutcome, RunRecord, score_run
from qmd.synth.generator import GroundTruth
from qmd.utils.validator import ConfigValidator

logger = logging.getLogger(__name__)

FAR_NOT_MONOTONE = "far_not_monotone"


@dataclass
class SweepRow:
    """Aggregate over the suite at one threshold"""
    b: float
    add: float
    far: float
    mean_f_measure: float
    num_false_alarms: int
    num_misses: int
    num_runs: int
    note: str = ""


@dataclass
class SweepResult:
    """Rows sorted by threshold, with every run record per threshold"""
    kind: DetectorKind
    rows: List[SweepRow]
    records: Dict[float, List[RunRecord]] = field(default_factory=dict)
    traces: Dict[str, List[TraceRow]] = field(default_factory=dict)

    @property
    def num_runs(self) -> int:
        return sum(row.num_runs for row in self.rows)


def _run_sequence(kind: DetectorKind, frames, gt: GroundTruth, thresholds: Sequence[float],
                  cfg: DetectorConfig, f_min: float) -> Tuple[List[RunRecord], List[TraceRow]]:
    """Run once to the largest threshold and replay the smaller ones"""
    detector = StreamDetector(kind, cfg)
    full = detector.run(frames, max(thresholds))
    records = []
    for b in thresholds:
        stopped, stop_frame, k_star = replay_threshold(full.trace, b, kind)
        mask = detector.mask_at(stop_frame, k_star) if stopped else None
        result = DetectionResult(stopped, stop_frame, k_star, mask,
                                 [row for row in full.trace if stop_frame is None or row.n <= stop_frame])
        records.append(score_run(result, gt, f_min))
    logger.info(f"[{kind.value}] {gt.name}: " + ", ".join(f"b={b}:{r.outcome.value}" for b, r in zip(thresholds, records)))
    return records, full.trace


def _aggregate(b: float, records: List[RunRecord]) -> SweepRow:
    delays = [r.delay for r in records if r.outcome == RunOutcome.DETECTION]
    scores = [r.f_measure for r in records if r.f_measure is not None]
    false_alarms = sum(r.outcome == RunOutcome.FALSE_ALARM for r in records)
    return SweepRow(
        b=b,
        add=float(np.mean(delays)) if delays else math.nan,
        far=false_alarms / len(records),
        mean_f_measure=float(np.mean(scores)) if scores else math.nan,
        num_false_alarms=false_alarms,
        num_misses=sum(r.outcome == RunOutcome.MISS for r in records),
        num_runs=len(records),
    )


def sweep(detector_kind, suite: Sequence[Tuple[list, GroundTruth]], thresholds: Sequence[float],
          config: Optional[DetectorConfig] = None, jobs: Optional[int] = None,
          f_min: float = defaults.F_MEASURE_MIN) -> SweepResult:
    """
    Run a detector over a suite at every threshold

    ADD averages the delays of accepted detections; FAR is false alarms over the
    number of sequences at that threshold. Misses are counted separately.

    Args:
        detector_kind: full, fast or baseline_F
        suite: (frames, GroundTruth) pairs
        thresholds: Thresholds b
        config: Detector configuration
        jobs: Worker threads across sequences (defaults to config.jobs)
        f_min: Minimum f-measure for an accepted detection

    Returns:
        SweepResult with one row per threshold, ascending in b

    Raises:
        ConfigError: On an empty suite or invalid thresholds
    """
    kind = DetectorKind(detector_kind)
    if not suite:
        raise ConfigError("Sweep needs a nonempty suite")
    is_valid, errors = ConfigValidator.validate_thresholds(list(thresholds))
    if not is_valid:
        raise ConfigError("; ".join(errors))

    cfg = config or DetectorConfig()
    thresholds = sorted(float(b) for b in thresholds)
    ordered = sorted(suite, key=lambda item: item[1].name)
    jobs = jobs or cfg.jobs
    # Sequences run in parallel; each detector stays single-threaded
    seq_cfg = replace(cfg, jobs=1) if jobs > 1 else cfg

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            futures = [executor.submit(_run_sequence, kind, frames, gt, thresholds, seq_cfg, f_min)
                       for frames, gt in ordered]
            outputs = [future.result() for future in futures]
    else:
        outputs = [_run_sequence(kind, frames, gt, thresholds, seq_cfg, f_min) for frames, gt in ordered]

    per_sequence = [records for records, _ in outputs]
    traces = {gt.name: trace for (_, gt), (_, trace) in zip(ordered, outputs)}

    records = {b: [runs[i] for runs in per_sequence] for i, b in enumerate(thresholds)}
    rows = [_aggregate(b, records[b]) for b in thresholds]

    for previous, row in zip(rows, rows[1:]):
        if row.far > previous.far:
            row.note = FAR_NOT_MONOTONE
            logger.warning(f"[{kind.value}] FAR rises from {previous.far:.3f} at b={previous.b} "
                           f"to {row.far:.3f} at b={row.b}")

    for row in rows:
        logger.info(f"[{kind.value}] b={row.b}: ADD={row.add:.2f} FAR={row.far:.3f} "
                    f"f={row.mean_f_measure:.3f} FA={row.num_false_alarms} miss={row.num_misses}")
    return SweepResult(kind=kind, rows=rows, records=records, traces=traces)
