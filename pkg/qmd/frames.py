"""
Frame and region-mask value types shared by the flow, model and segmentation stages

A frame is a float64 numpy array, H x W (gray) or H x W x 3 (color), indexed [y, x].
"""
from dataclasses import dataclass

import numpy as np

from qmd.config import LUMINANCE_WEIGHTS
from qmd.errors import DimensionMismatchError, RejectedInputError


def as_frame(image) -> np.ndarray:
    """Return image as a float64 H x W or H x W x C array"""
    frame = np.asarray(image, dtype=np.float64)
    if frame.ndim not in (2, 3):
        raise RejectedInputError(f"Frame must be 2-D or 3-D, got shape {frame.shape}")
    if not np.all(np.isfinite(frame)):
        raise RejectedInputError("Frame contains non-finite values")
    return frame


def to_luminance(frame: np.ndarray) -> np.ndarray:
    """Reduce a color frame to luminance; gray frames pass through"""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim == 2:
        return frame
    if frame.shape[2] == 1:
        return frame[..., 0]
    weights = np.asarray(LUMINANCE_WEIGHTS[:frame.shape[2]], dtype=np.float64)
    return frame[..., :len(weights)] @ (weights / weights.sum())


@dataclass(frozen=True)
class RegionMask:
    """
    Binary object membership R_i on the grid of frame i (True = object)

    The complement pair (background = ~bits, object = bits) always partitions the grid.
    """
    bits: np.ndarray
    frame_index: int = 0
    degenerate: bool = False

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.ndim != 2:
            raise DimensionMismatchError(f"Mask must be 2-D, got shape {bits.shape}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def empty(cls, shape, frame_index: int = 0) -> "RegionMask":
        return cls(np.zeros(shape[:2], dtype=bool), frame_index)

    @property
    def shape(self):
        return self.bits.shape

    @property
    def area(self) -> int:
        return int(self.bits.sum())

    @property
    def is_empty(self) -> bool:
        return not self.bits.any()

    def complement(self) -> "RegionMask":
        return RegionMask(~self.bits, self.frame_index, self.degenerate)

    def region(self, j: int) -> np.ndarray:
        """Membership of region j: 0 = background, 1 = object"""
        return self.bits if j == 1 else ~self.bits

    def with_index(self, frame_index: int) -> "RegionMask":
        return RegionMask(self.bits, frame_index, self.degenerate)
