"""
Segmentation energy: accumulated residuals, appearance histograms and the boundary prior
"""
import logging
import math
from typing import Sequence, Tuple

import numpy as np

from qmd import config
from qmd.errors import WindowError, check_same_shape
from qmd.flow.types import Warp
from qmd.flow.warping import warp_image
from qmd.frames import RegionMask, to_luminance
from qmd.segmentation.types import ColorHistogramPair, MotionAmbiguity, SegEnergyTerms
from qmd.video_model.model import NoiseModel, ResidualField, rho

logger = logging.getLogger(__name__)


def perimeter(bits: np.ndarray) -> int:
    """Number of 4-neighbor pixel pairs with different labels"""
    bits = np.asarray(bits, dtype=bool)
    return int((bits[1:, :] != bits[:-1, :]).sum() + (bits[:, 1:] != bits[:, :-1]).sum())


def accumulate_f(frames: Sequence[np.ndarray], warps_to_each: Tuple[Sequence[Warp], Sequence[Warp]],
                 mask_frame: int, noise: NoiseModel,
                 prior_weight: float = config.PRIOR_WEIGHT) -> SegEnergyTerms:
    """
    Residuals accumulated along each region's warp chain, on the anchor grid

        f^j(x) = sum_t rho(F_{t+1}(W^j_{t+1}(x)) - F_t(W^j_t(x)))

    where W^j_t maps the anchor frame F_m to frame t (W^j_m is the identity).
    Samples that fall off either grid count as saturated (beta).

    Args:
        frames: Window frames in time order
        warps_to_each: (background chain, object chain), one warp per frame
        mask_frame: Position of the anchor frame in `frames`
        noise: Noise model (supplies beta)
        prior_weight: Boundary prior weight carried into the terms (nats per edge)

    Returns:
        SegEnergyTerms with f0, f1, the per-pair residual stacks and the weights and
        offsets that put the motion costs in nats: 1 / 2 sigma_j^2 per residual and
        log(sigma_fg / sigma_bg) per object pixel and pair

    Raises:
        WindowError: If a chain does not hold one warp per frame
    """
    if len(frames) < 2:
        raise WindowError("accumulate_f needs at least two frames")
    if not (0 <= mask_frame < len(frames)):
        raise WindowError(f"mask_frame {mask_frame} outside window of {len(frames)} frames")

    lum = [to_luminance(f) for f in frames]
    fields, stacks = [], []
    for chain in warps_to_each:
        if len(chain) != len(frames):
            raise WindowError(f"Warp chain holds {len(chain)} warps for {len(frames)} frames")
        samples = [warp_image(lum[t], chain[t]) for t in range(len(frames))]
        f = np.zeros(lum[mask_frame].shape)
        stack = []
        for t in range(len(frames) - 1):
            check_same_shape(samples[t].values, lum[mask_frame], names=["warped", "anchor"])
            valid = samples[t].valid & samples[t + 1].valid
            values = np.where(valid, rho(samples[t + 1].values - samples[t].values, noise.beta), noise.beta)
            f += values
            stack.append(ResidualField(values=np.where(valid, values, 0.0), valid=valid))
        fields.append(f)
        stacks.append(stack)
    pairs = len(frames) - 1
    size_term = pairs * (math.log(noise.sigma_fg) - math.log(noise.sigma_bg))
    return SegEnergyTerms(f0=fields[0], f1=fields[1], prior_weight=prior_weight, stacks=stacks,
                          weights=(noise.weight(0), noise.weight(1)), offsets=(0.0, size_term))


def color_histograms(frame_m: np.ndarray, mask: RegionMask,
                     bins_gray: int = config.HIST_BINS_GRAY, bins_color: int = config.HIST_BINS_COLOR,
                     dynamic_range: float = config.DYNAMIC_RANGE) -> ColorHistogramPair:
    """
    Add-one smoothed appearance histograms of both regions of frame_m

    Gray frames use bins_gray luminance bins; color frames bins_color per channel.
    An empty region gets the uniform histogram.
    """
    frame = np.asarray(frame_m, dtype=np.float64)
    check_same_shape(frame, mask.bits, names=["frame_m", "mask"])
    color = frame.ndim == 3 and frame.shape[2] >= 3
    channels, bins = (3, bins_color) if color else (1, bins_gray)
    if color:
        frame = frame[..., :3]

    template = ColorHistogramPair(np.ones(1), np.ones(1), bins, channels, dynamic_range)
    index = template.bin_index(frame)
    size = bins ** channels
    hists = []
    for j in (0, 1):
        counts = np.bincount(index[mask.region(j)], minlength=size).astype(np.float64) + 1.0
        hists.append(counts / counts.sum())
    return ColorHistogramPair(hists[0], hists[1], bins, channels, dynamic_range)


def data_cost(terms: SegEnergyTerms, maf: MotionAmbiguity, hists: ColorHistogramPair,
              frame_m: np.ndarray, j: int) -> np.ndarray:
    """Per-pixel cost of assigning region j: (1 - maf) (w_j f^j + c_j) - maf log p_j(I_m)"""
    weight = maf.values
    return (1.0 - weight) * terms.motion_cost(j) - weight * hists.log_prob(frame_m, j)


def energy_seg(mask: RegionMask, terms: SegEnergyTerms, maf: MotionAmbiguity,
               hists: ColorHistogramPair, frame_m: np.ndarray) -> float:
    """
    Blended segmentation energy of a mask

        sum_j integral_{R^j} [(1 - maf) (w_j f^j + c_j) - maf log p_j(I_m)] + prior_weight * perimeter(R)
    """
    check_same_shape(mask.bits, terms.f0, maf.values, names=["mask", "f0", "maf"])
    total = 0.0
    for j in (0, 1):
        region = mask.region(j)
        if region.any():
            total += float(data_cost(terms, maf, hists, frame_m, j)[region].sum())
    return total + terms.prior_weight * perimeter(mask.bits)
