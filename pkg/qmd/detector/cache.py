"""
Per-stream cache of frames, whole-domain flows and residual moments

Everything a frame contributes is computed when it arrives, so window evaluations
running in worker threads only read from the cache.
"""
import logging
from typing import Dict, List

import numpy as np

from qmd.detector.types import DetectorConfig, ResidualSummary
from qmd.errors import WindowError, check_same_shape
from qmd.flow.estimator import estimate_flow, estimate_region_flow
from qmd.flow.types import FlowField, Warp
from qmd.frames import as_frame
from qmd.video_model.model import ResidualField, residual

logger = logging.getLogger(__name__)


class SequenceCache:
    """Frames 1..n of one stream with their whole-domain (null-hypothesis) flows"""

    def __init__(self, config: DetectorConfig):
        self.config = config
        self.frames: List[np.ndarray] = []
        self._forward: Dict[int, FlowField] = {}
        self._backward: Dict[int, FlowField] = {}
        self._null: Dict[int, FlowField] = {}
        self._residuals: Dict[int, ResidualField] = {}
        self.summary = ResidualSummary()

    @classmethod
    def from_frames(cls, frames, config: DetectorConfig) -> "SequenceCache":
        cache = cls(config)
        for frame in frames:
            cache.push(frame)
        return cache

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def shape(self):
        return self.frames[0].shape[:2]

    def push(self, frame) -> int:
        """
        Add the next frame and compute its dense and null flows and Res^NL

        Returns:
            1-based number of the new frame
        """
        frame = as_frame(frame)
        if self.frames:
            check_same_shape(self.frames[0], frame, names=["first frame", "new frame"])
        self.frames.append(frame)
        n = len(self.frames)
        if n >= 2:
            prev = self.frames[n - 2]
            self._forward[n - 1] = estimate_flow(prev, frame, params=self.config.flow)
            self._backward[n] = estimate_flow(frame, prev, params=self.config.flow)
            self._null[n] = estimate_region_flow(frame, prev, params=self.config.flow)
            field = residual(frame, prev, Warp.from_flow(self._backward[n]), self.config.noise)
            self._residuals[n] = field
            self.summary.add(n, field.values, field.valid)
            logger.debug(f"Frame {n}: mean Res^NL {self.summary.means[n]:.3f}")
        return n

    def frame(self, i: int) -> np.ndarray:
        return self.frames[i - 1]

    def forward(self, i: int) -> FlowField:
        """Whole-domain flow i -> i+1 on the grid of frame i"""
        self._require(i + 1)
        return self._forward[i]

    def backward(self, i: int) -> FlowField:
        """Whole-domain flow i -> i-1 on the grid of frame i"""
        self._require(i)
        return self._backward[i]

    def null(self, i: int) -> FlowField:
        """Null-hypothesis flow i -> i-1 on the grid of frame i (smooth estimator)"""
        self._require(i)
        return self._null[i]

    def residual(self, i: int) -> ResidualField:
        """Res^NL_i: pair i-1 -> i on the grid of frame i"""
        self._require(i)
        return self._residuals[i]

    def _require(self, i: int) -> None:
        if not (2 <= i <= len(self.frames)):
            raise WindowError(f"Frame {i} not available (have {len(self.frames)} frames)")
