"""
Online quickest detectors: full window scan, F-guided fast scan and the F-threshold baseline
"""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Iterable, List, Optional, Tuple

from qmd import config as defaults
from qmd.detector.cache import SequenceCache
from qmd.detector.fstat import f_statistic
from qmd.detector.types import DetectionResult, DetectorConfig, TraceRow, WindowHypothesis
from qmd.detector.window import window_likelihood
from qmd.errors import WindowError
from qmd.frames import RegionMask

logger = logging.getLogger(__name__)


class DetectorKind(str, Enum):
    FULL = "full"
    FAST = "fast"
    BASELINE = "baseline_F"


def crossed(kind: DetectorKind, statistic: float, threshold: float) -> bool:
    """Stop test: strict for the likelihood-ratio detectors, inclusive for the F baseline"""
    if math.isnan(statistic):
        return False
    if kind == DetectorKind.BASELINE:
        return statistic >= threshold
    return statistic > threshold


def row_statistic(kind: DetectorKind, row: TraceRow) -> float:
    """The per-frame statistic a detector thresholds"""
    return row.f_value if kind == DetectorKind.BASELINE else row.log_lambda


def replay_threshold(trace: List[TraceRow], threshold: float,
                     kind: DetectorKind) -> Tuple[bool, Optional[int], Optional[int]]:
    """
    Stopping decision for another threshold from a recorded trace

    The per-frame statistics do not depend on the threshold, so the first frame
    n >= 3 whose statistic crosses `threshold` is where a run at that threshold
    would stop.

    Returns:
        (stopped, stop_frame, change_estimate)
    """
    for row in trace:
        if row.n >= defaults.MIN_DETECTION_FRAME and crossed(kind, row_statistic(kind, row), threshold):
            return True, row.n, row.k_star
    return False, None, None


class StreamDetector:
    """
    One detector instance per stream

    Owns the sequence cache and evaluation counter; window evaluations of a frame
    run in a thread pool and are reduced in k order.
    """

    def __init__(self, kind: DetectorKind, config: Optional[DetectorConfig] = None):
        self.kind = DetectorKind(kind)
        self.config = config or DetectorConfig()
        self.cache = SequenceCache(self.config)
        self.evaluations = 0
        self.masks = {}
        self.trace: List[TraceRow] = []
        self._floor_warned = False
        self._executor: Optional[ThreadPoolExecutor] = None

    def candidates(self, n: int) -> range:
        """Candidate change frames 2..n-1, limited to n - max_window when capped"""
        first = 2
        if self.config.max_window is not None:
            first = max(first, n - self.config.max_window)
        return range(first, n)

    def best_f(self, n: int) -> Tuple[int, float]:
        """argmax_k F_{k,n} (ties to the smallest k) and its value"""
        best_k, best_value = None, -math.inf
        for k in self.candidates(n):
            stat = f_statistic(self.cache.summary, k, n)
            if stat.floored and not self._floor_warned:
                logger.warning("Residual standard deviation floored in F statistic")
                self._floor_warned = True
            if stat.value > best_value:
                best_k, best_value = k, stat.value
        return best_k, best_value

    def window(self, k: int, n: int) -> WindowHypothesis:
        self.evaluations += 1
        return window_likelihood(self.cache, k, n, self.config)

    def _scan_windows(self, n: int) -> List[WindowHypothesis]:
        ks = list(self.candidates(n))
        self.evaluations += len(ks)
        if self._executor is None or len(ks) == 1:
            return [window_likelihood(self.cache, k, n, self.config) for k in ks]
        futures = [self._executor.submit(window_likelihood, self.cache, k, n, self.config) for k in ks]
        return [future.result() for future in futures]

    def step(self, frame) -> TraceRow:
        """
        Consume the next frame and return its trace row

        Frames 1 and 2 have no statistic (log Lambda = 0, no k*).
        """
        started = time.perf_counter()
        n = self.cache.push(frame)
        before = self.evaluations
        mean_residual = self.cache.summary.means.get(n, 0.0)

        if n < defaults.MIN_DETECTION_FRAME:
            row = TraceRow(n=n, log_lambda=0.0, k_star=None, f_value=0.0, mean_residual=mean_residual)
        elif self.kind == DetectorKind.FULL:
            hypotheses = self._scan_windows(n)
            best = hypotheses[0]
            for hypothesis in hypotheses[1:]:
                if hypothesis.log_lambda > best.log_lambda:
                    best = hypothesis
            self.masks[n] = best.mask_n
            f_value = f_statistic(self.cache.summary, best.k, n).value
            row = TraceRow(n=n, log_lambda=best.log_lambda, k_star=best.k, f_value=f_value,
                           mean_residual=mean_residual)
        elif self.kind == DetectorKind.FAST:
            k_star, f_value = self.best_f(n)
            hypothesis = self.window(k_star, n)
            self.masks[n] = hypothesis.mask_n
            row = TraceRow(n=n, log_lambda=hypothesis.log_lambda, k_star=k_star, f_value=f_value,
                           mean_residual=mean_residual)
        else:
            k_star, f_value = self.best_f(n)
            row = TraceRow(n=n, log_lambda=math.nan, k_star=k_star, f_value=f_value,
                           mean_residual=mean_residual)

        row.evaluations = self.evaluations - before
        row.millis = (time.perf_counter() - started) * 1000.0 if self.config.timing else 0.0
        self.trace.append(row)
        logger.debug(f"n={n} log_lambda={row.log_lambda:.5f} k*={row.k_star} F={row.f_value:.4f} "
                     f"mean_res={row.mean_residual:.3f} evals={row.evaluations}")
        return row

    def mask_at(self, n: int, k: int) -> RegionMask:
        """Mask of the selected window at frame n (one extra window call for the baseline)"""
        if n not in self.masks:
            self.masks[n] = self.window(k, n).mask_n
        return self.masks[n]

    def run(self, stream: Iterable, threshold: float) -> DetectionResult:
        """
        Process frames until the statistic crosses the threshold or the stream ends

        Args:
            stream: Iterable of frames (frame 1 first)
            threshold: b (log Lambda units, or F units for the baseline)

        Returns:
            DetectionResult

        Raises:
            WindowError: If the stream ends before frame 3
        """
        workers = self.config.jobs if self.kind == DetectorKind.FULL else 1
        self._executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
        try:
            for frame in stream:
                row = self.step(frame)
                if row.n >= defaults.MIN_DETECTION_FRAME and crossed(self.kind, row_statistic(self.kind, row), threshold):
                    mask = self.mask_at(row.n, row.k_star)
                    logger.info(f"[{self.kind.value}] stop at frame {row.n}, change estimate {row.k_star}, "
                                f"statistic {row_statistic(self.kind, row):.4f} (b={threshold})")
                    return DetectionResult(True, row.n, row.k_star, mask, list(self.trace),
                                           self.evaluations, dict(self.masks))
        finally:
            if self._executor is not None:
                self._executor.shutdown(wait=True)
                self._executor = None

        if len(self.cache) < defaults.MIN_DETECTION_FRAME:
            raise WindowError(f"Stream ended after {len(self.cache)} frames; at least 3 are required")
        logger.info(f"[{self.kind.value}] stream exhausted after {len(self.cache)} frames without a stop")
        return DetectionResult(False, None, None, None, list(self.trace), self.evaluations, dict(self.masks))


def quickest_detect(stream: Iterable, b: float, config: Optional[DetectorConfig] = None) -> DetectionResult:
    """Evaluate every candidate change time per frame; stop at the first max_k log Lambda_{k,n} > b"""
    return StreamDetector(DetectorKind.FULL, config).run(stream, b)


def fast_quickest_detect(stream: Iterable, b: float, config: Optional[DetectorConfig] = None) -> DetectionResult:
    """Evaluate one window per frame at k* = argmax_k F_{k,n}; stop at the first log Lambda > b"""
    return StreamDetector(DetectorKind.FAST, config).run(stream, b)


def baseline_f_detector(stream: Iterable, f_threshold: float,
                        config: Optional[DetectorConfig] = None) -> DetectionResult:
    """Stop at the first max_k F_{k,n} >= f_threshold; the stop mask comes from one window call"""
    return StreamDetector(DetectorKind.BASELINE, config).run(stream, f_threshold)


def run_detector(kind, stream: Iterable, threshold: float,
                 config: Optional[DetectorConfig] = None) -> DetectionResult:
    """Dispatch on the detector kind"""
    return StreamDetector(DetectorKind(kind), config).run(stream, threshold)
