"""
Segmentation value types
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from qmd.errors import RejectedInputError
from qmd.frames import RegionMask, to_luminance


@dataclass(frozen=True)
class MotionAmbiguity:
    """Per-pixel weight in [0, 1]: 1 where motion carries no information"""
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise RejectedInputError("Motion ambiguity must lie in [0, 1]")
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, shape) -> "MotionAmbiguity":
        return cls(np.zeros(shape[:2]))


@dataclass(frozen=True)
class ColorHistogramPair:
    """
    Laplace-smoothed appearance histograms of the background (0) and object (1) regions

    Attributes:
        hist0: Background histogram (sums to 1)
        hist1: Object histogram (sums to 1)
        bins: Bins per channel
        channels: 1 for luminance, 3 for color
        dynamic_range: Intensity range used for quantization
    """
    hist0: np.ndarray
    hist1: np.ndarray
    bins: int
    channels: int
    dynamic_range: float

    def hist(self, j: int) -> np.ndarray:
        return self.hist1 if j == 1 else self.hist0

    def swapped(self) -> "ColorHistogramPair":
        return ColorHistogramPair(self.hist1, self.hist0, self.bins, self.channels, self.dynamic_range)

    def bin_index(self, frame: np.ndarray) -> np.ndarray:
        """Per-pixel flat bin index of a frame"""
        frame = np.asarray(frame, dtype=np.float64)
        if self.channels == 1:
            planes = [to_luminance(frame)]
        else:
            planes = [frame[..., c] for c in range(self.channels)]
        index = np.zeros(planes[0].shape, dtype=np.int64)
        for plane in planes:
            q = np.floor(plane / self.dynamic_range * self.bins).astype(np.int64)
            index = index * self.bins + np.clip(q, 0, self.bins - 1)
        return index

    def log_prob(self, frame: np.ndarray, j: int) -> np.ndarray:
        """log p_{R^j}(I(x)) per pixel"""
        return np.log(self.hist(j))[self.bin_index(frame)]


@dataclass(frozen=True)
class SegEnergyTerms:
    """
    Accumulated per-region residuals f^0, f^1 on the anchor grid, with the prior weight

    The motion cost of region j is weights[j] * f^j + offsets[j] per pixel; the defaults
    leave f unscaled. stacks holds the per-pair residual fields of each hypothesis, in
    window order.
    """
    f0: np.ndarray
    f1: np.ndarray
    prior_weight: float
    stacks: Optional[List[list]] = field(default=None)
    weights: Tuple[float, float] = (1.0, 1.0)
    offsets: Tuple[float, float] = (0.0, 0.0)

    def f(self, j: int) -> np.ndarray:
        return self.f1 if j == 1 else self.f0

    def motion_cost(self, j: int) -> np.ndarray:
        return self.weights[j] * self.f(j) + self.offsets[j]


@dataclass
class EvolutionResult:
    """Outcome of region evolution"""
    mask: RegionMask
    energy_trace: List[float]
    iterations: int
    converged: bool
    flips: int = 0
