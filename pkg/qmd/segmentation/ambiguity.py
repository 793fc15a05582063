"""
Motion ambiguity: where residuals cannot tell the regions apart
"""
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from qmd import config
from qmd.frames import to_luminance
from qmd.segmentation.types import MotionAmbiguity


def texture_energy(frame: np.ndarray, window: int = config.TEXTURE_WINDOW) -> np.ndarray:
    """Mean squared gradient magnitude of the luminance over a window x window box"""
    gy, gx = np.gradient(to_luminance(frame))
    return ndimage.uniform_filter(gx * gx + gy * gy, size=window, mode="nearest")


def motion_ambiguity(residual_stack: Sequence, frame_m: np.ndarray, beta: float,
                     texture_threshold: Optional[float] = None,
                     dynamic_range: float = config.DYNAMIC_RANGE) -> MotionAmbiguity:
    """
    maf on the grid of the anchor frame

    A pixel is ambiguous when its residual is saturated at beta (or unobservable) in
    every stacked field, or when the anchor frame is textureless around it. The
    indicator is softened by a 3x3 box blur, keeping flagged pixels at 1.

    Args:
        residual_stack: ResidualFields on the anchor grid (anchor pair excluded)
        frame_m: Anchor frame
        beta: rho truncation
        texture_threshold: Gradient energy below which a pixel is textureless
            (defaults to (TEXTURE_FRACTION * dynamic_range) ** 2)
        dynamic_range: Intensity range

    Returns:
        MotionAmbiguity with values in [0, 1]
    """
    if texture_threshold is None:
        texture_threshold = (config.TEXTURE_FRACTION * dynamic_range) ** 2

    textureless = texture_energy(frame_m) < texture_threshold
    if residual_stack:
        saturated = np.ones(textureless.shape, dtype=bool)
        for field in residual_stack:
            saturated &= (~field.valid) | (field.values >= beta)
    else:
        saturated = np.zeros(textureless.shape, dtype=bool)

    indicator = (saturated | textureless).astype(np.float64)
    blurred = ndimage.uniform_filter(indicator, size=config.AMBIGUITY_BLUR, mode="nearest")
    return MotionAmbiguity(np.clip(np.maximum(indicator, blurred), 0.0, 1.0))
