"""
Region competition on the segmentation energy

A sweep visits boundary pixels in two checkerboard passes. Pixels of one parity
share no 4-neighbor, so their flip costs are independent and every flip with a
negative cost lowers the energy by exactly that cost. The energy trace is
therefore non-increasing.
"""
import logging

import numpy as np

from qmd.frames import RegionMask
from qmd.segmentation.energy import data_cost, energy_seg
from qmd.segmentation.types import ColorHistogramPair, EvolutionResult, MotionAmbiguity, SegEnergyTerms

logger = logging.getLogger(__name__)

FLIP_TOLERANCE = 1e-9


def _neighbor_counts(bits: np.ndarray):
    """Per pixel: in-grid 4-neighbors with the same label, and with the other label"""
    labels = np.pad(bits.astype(np.int8), 1, constant_values=-1)
    center = labels[1:-1, 1:-1]
    same = np.zeros(bits.shape, dtype=np.int32)
    other = np.zeros(bits.shape, dtype=np.int32)
    for neighbor in (labels[:-2, 1:-1], labels[2:, 1:-1], labels[1:-1, :-2], labels[1:-1, 2:]):
        inside = neighbor >= 0
        same += inside & (neighbor == center)
        other += inside & (neighbor != center)
    return same, other


def evolve_region(mask: RegionMask, terms: SegEnergyTerms, maf: MotionAmbiguity,
                  hists: ColorHistogramPair, frame_m: np.ndarray, steps: int = 1) -> EvolutionResult:
    """
    Descend the segmentation energy by boundary flips

    Args:
        mask: Starting region
        terms: Accumulated residuals and prior weight
        maf: Motion ambiguity
        hists: Region appearance histograms
        frame_m: Anchor frame
        steps: Maximum number of sweeps (>= 1)

    Returns:
        EvolutionResult; converged when a sweep flips nothing
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")

    cost0 = data_cost(terms, maf, hists, frame_m, 0)
    cost1 = data_cost(terms, maf, hists, frame_m, 1)
    # Change in data cost when a pixel moves to the other region
    to_object = cost1 - cost0

    bits = mask.bits.copy()
    height, width = bits.shape
    parity = (np.add.outer(np.arange(height), np.arange(width)) % 2).astype(bool)
    trace = [energy_seg(mask, terms, maf, hists, frame_m)]
    total_flips = 0
    converged = False
    sweeps = 0

    for _ in range(steps):
        sweeps += 1
        flips_this_sweep = 0
        for phase in (False, True):
            same, other = _neighbor_counts(bits)
            delta = np.where(bits, -to_object, to_object) + terms.prior_weight * (same - other)
            flip = (other > 0) & (parity == phase) & (delta < -FLIP_TOLERANCE)
            count = int(flip.sum())
            if count:
                bits ^= flip
                flips_this_sweep += count
        total_flips += flips_this_sweep
        trace.append(energy_seg(RegionMask(bits, mask.frame_index), terms, maf, hists, frame_m))
        if flips_this_sweep == 0:
            converged = True
            break

    logger.debug(f"Region evolution: {sweeps} sweeps, {total_flips} flips, converged={converged}")
    return EvolutionResult(
        mask=RegionMask(bits, mask.frame_index, mask.degenerate),
        energy_trace=trace,
        iterations=sweeps,
        converged=converged,
        flips=total_flips,
    )
