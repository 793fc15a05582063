"""
Joint region segmentation and likelihood ratio for one (k, n) window

The anchor frame is n: masks, region flows and residuals live on the later frame
of each pair and use backward flows i -> i-1. The window covers the pairs arriving
with frames k+1..n.
"""
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from qmd.detector.cache import SequenceCache
from qmd.detector.types import DetectorConfig, WindowHypothesis
from qmd.errors import WindowError
from qmd.flow.estimator import estimate_region_flow
from qmd.flow.types import FlowField, Warp
from qmd.flow.warping import compose_chain, propagate_region, sample_bilinear
from qmd.frames import RegionMask
from qmd.segmentation.ambiguity import motion_ambiguity
from qmd.segmentation.energy import accumulate_f, color_histograms, perimeter
from qmd.segmentation.evolution import evolve_region
from qmd.segmentation.seeding import init_region
from qmd.video_model.model import NoiseModel, ResidualField, estimate_sigma, log_lr_window

logger = logging.getLogger(__name__)


def _seed_warps(cache: SequenceCache, k: int, n: int) -> Tuple[Warp, Warp]:
    """
    Cumulative warps from the anchor grid n back to frame k

    Returns (forward-consistency warp, backward warp): the backward warp chains the
    backward flows n -> k; the other is the forward displacement k -> n of the same
    points, sampled at their position in frame k.
    """
    shape = cache.shape
    backward = compose_chain([cache.backward(i) for i in range(n, k, -1)], shape)[-1]
    forward = compose_chain([cache.forward(i) for i in range(k, n)], shape)[-1]
    forward_disp = forward.displacement()
    base = Warp.identity(shape)
    du = sample_bilinear(forward_disp.u, backward.map_x, backward.map_y)
    dv = sample_bilinear(forward_disp.v, backward.map_x, backward.map_y)
    return Warp(base.map_x + du, base.map_y + dv), backward


def propagate_masks(cache: SequenceCache, mask_n: RegionMask, k: int, n: int,
                    object_flows: Optional[Dict[int, FlowField]] = None) -> Dict[int, RegionMask]:
    """
    Masks on the grids of frames k+1..n, carried back from R_n

    Without object flows the dense whole-domain flows carry the mask; once the object
    region has its own flows (object_flows[i]: i -> i-1 on the grid of i) those do.
    """
    masks = {n: mask_n}
    for i in range(n - 1, k, -1):
        if object_flows is None:
            masks[i] = propagate_region(masks[i + 1], cache.backward(i + 1), cache.forward(i), frame_index=i)
        else:
            masks[i] = propagate_region(masks[i + 1], object_flows[i + 1], None, frame_index=i)
    return masks


def _region_flows(cache: SequenceCache, masks: Dict[int, RegionMask], k: int, n: int,
                  config: DetectorConfig) -> Dict[int, Dict[int, FlowField]]:
    """Backward flows i -> i-1 restricted to each region, i = k+1..n"""
    flows = {0: {}, 1: {}}
    for i in range(k + 1, n + 1):
        for j in (0, 1):
            region = masks[i].region(j)
            if not region.any() or region.all():
                # Region absent or covering the grid: the null flow applies
                flows[j][i] = cache.null(i)
                continue
            flows[j][i] = estimate_region_flow(cache.frame(i), cache.frame(i - 1), mask=region,
                                               params=config.flow)
    return flows


def _chain_from_anchor(flows: Dict[int, FlowField], k: int, n: int, shape) -> List[Warp]:
    """Warps from the anchor grid n to frames k..n, in time order"""
    chain = compose_chain([flows[i] for i in range(n, k, -1)], shape)
    return list(reversed(chain))


def _window_noise(cache: SequenceCache, k: int, config: DetectorConfig) -> NoiseModel:
    if not config.estimate_noise:
        return config.noise
    sigma = estimate_sigma([cache.residual(i) for i in range(2, k + 1)], config.dynamic_range)
    return config.noise.with_sigma(sigma)


def window_likelihood(frames, k: int, n: int, config: DetectorConfig) -> WindowHypothesis:
    """
    Segment the moving region and score change time k at frame n

    Seeds the region by clustering cumulative displacements, then alternates mask
    propagation, region-restricted flow, residual accumulation and one evolution
    pass until the anchor mask stops changing (or max_outer_iterations). Masks are
    carried by the dense flows on the first pass and by the object flows after. The
    log likelihood ratio against the null flow is reported per pixel; the empty
    region is always a candidate, so it never drops below zero.

    Args:
        frames: SequenceCache, or a sequence of frames (frames[0] is frame 1)
        k: Candidate change frame
        n: Current frame
        config: Detector configuration

    Returns:
        WindowHypothesis with log Lambda_{k,n} / |Omega| and the anchor mask R_n (empty
        when no region beats the null hypothesis)

    Raises:
        WindowError: If 2 <= k < n <= available frames does not hold
    """
    cache = frames if isinstance(frames, SequenceCache) else SequenceCache.from_frames(list(frames)[:n], config)
    if not (2 <= k < n <= len(cache)):
        raise WindowError(f"Window requires 2 <= k < n <= {len(cache)}, got k={k}, n={n}")

    shape = cache.shape
    noise = _window_noise(cache, k, config)
    anchor = cache.frame(n)
    window_frames = [cache.frame(i) for i in range(k, n + 1)]
    pairs = n - k

    cum_fwd, cum_bwd = _seed_warps(cache, k, n)
    mask = init_region(cum_fwd, cum_bwd, seed=config.seed, restarts=config.kmeans_restarts, frame_index=n)
    degenerate_seed = mask.degenerate

    converged = False
    iterations = 0
    masks = flows = None
    for iterations in range(1, config.max_outer_iterations + 1):
        masks = propagate_masks(cache, mask, k, n, flows[1] if flows is not None else None)
        flows = _region_flows(cache, masks, k, n, config)
        chains = (_chain_from_anchor(flows[0], k, n, shape), _chain_from_anchor(flows[1], k, n, shape))
        terms = accumulate_f(window_frames, chains, len(window_frames) - 1, noise, config.prior_weight * pairs)

        stack = [
            ResidualField(np.where(mask.bits, fg.values, bg.values), np.where(mask.bits, fg.valid, bg.valid))
            for bg, fg in zip(terms.stacks[0], terms.stacks[1])
        ]
        if len(stack) > 1:
            stack = stack[:-1]
        maf = motion_ambiguity(stack, anchor, noise.beta, config.texture_threshold, config.dynamic_range)
        hists = color_histograms(anchor, mask, config.hist_bins_gray, config.hist_bins_color, config.dynamic_range)
        evolved = evolve_region(mask, terms, maf, hists, anchor, steps=config.sweeps_per_iteration)

        if evolved.mask.is_empty:
            # The empty region is the null hypothesis itself
            mask = RegionMask.empty(shape, n)
            converged = True
            break
        if np.array_equal(evolved.mask.bits, mask.bits):
            converged = True
            break
        mask = RegionMask(evolved.mask.bits, n, degenerate_seed)

    area = shape[0] * shape[1]
    log_lambda = 0.0
    if not mask.is_empty:
        if not converged:
            logger.warning(f"Window k={k}, n={n} did not converge in {config.max_outer_iterations} iterations")
            masks = propagate_masks(cache, mask, k, n, flows[1])
            flows = _region_flows(cache, masks, k, n, config)

        # Pairs in anchor-first order: reference frame i, target frame i-1
        order = list(range(n, k, -1))
        log_lambda = log_lr_window(
            frames=[cache.frame(i) for i in order] + [cache.frame(k)],
            warps_bg=[Warp.from_flow(flows[0][i]) for i in order],
            warps_fg=[Warp.from_flow(flows[1][i]) for i in order],
            masks=[masks[i] for i in order],
            warps_null=[Warp.from_flow(cache.null(i)) for i in order],
            noise=noise,
            log_prior=-config.prior_weight * sum(perimeter(masks[i].bits) for i in order),
        )
        if log_lambda <= 0.0:
            # No region beats the empty one
            log_lambda = 0.0
            mask = RegionMask.empty(shape, n)

    hypothesis = WindowHypothesis(
        k=k,
        n=n,
        log_lambda=log_lambda / area,
        mask_n=RegionMask(mask.bits, n, degenerate_seed),
        converged=converged,
        degenerate_seed=degenerate_seed,
        outer_iterations=iterations,
    )
    logger.debug(f"Window k={k}, n={n}: log_lambda={hypothesis.log_lambda:.5f}, "
                 f"area={hypothesis.mask_n.area}, iterations={iterations}")
    return hypothesis
