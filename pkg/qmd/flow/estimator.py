"""
Coarse-to-fine robust flow estimator

Each pyramid level runs Gauss-Newton steps on the truncated-quadratic data term
rho(I_b(x + v) - I_a(x)) = min(r^2, beta): pixels whose residual reaches beta get
zero weight (occlusions and outliers drop out). Increments are solved in a
Gaussian-weighted local window, diffused by normalized convolution and, for
whole-domain flows, median filtered. Masked flows are estimated on the mask and
smoothly extended outside it by diffusion.

estimate_flow is the dense estimator (local window, median filter). estimate_region_flow
smooths at a scale tied to the frame size and serves the null and region hypotheses.
"""
import logging
from typing import List, Optional, Union

import numpy as np
from scipy import ndimage

from qmd import config
from qmd.errors import check_same_shape
from qmd.flow.types import FlowField, FlowParams
from qmd.frames import RegionMask, to_luminance

logger = logging.getLogger(__name__)

MAX_INCREMENT = 1.0  # px per Gauss-Newton step at the current level
TIKHONOV_FRACTION = 1e-3  # Relative to the mean gradient energy of the weighted pixels
NEIGHBORS = ndimage.generate_binary_structure(2, 1)


def resize(plane: np.ndarray, shape, order: int = 1) -> np.ndarray:
    """Resample a 2-D plane to an exact shape (pixel-center aligned)"""
    height, width = plane.shape
    out_h, out_w = int(shape[0]), int(shape[1])
    if (out_h, out_w) == (height, width):
        return plane.copy()
    ys = (np.arange(out_h) + 0.5) * (height / out_h) - 0.5
    xs = (np.arange(out_w) + 0.5) * (width / out_w) - 0.5
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    return ndimage.map_coordinates(plane, [yy, xx], order=order, mode="nearest")


def pyramid_shapes(shape, params: FlowParams) -> List[tuple]:
    """Level shapes, finest first, stopping before a side drops below MIN_PYRAMID_SIZE"""
    shapes = [tuple(shape[:2])]
    for _ in range(1, params.pyramid_levels):
        h, w = shapes[-1]
        nh, nw = int(round(h * params.scale_factor)), int(round(w * params.scale_factor))
        if min(nh, nw) < config.MIN_PYRAMID_SIZE:
            break
        shapes.append((nh, nw))
    return shapes


def build_pyramid(image: np.ndarray, shapes) -> List[np.ndarray]:
    """Gaussian pyramid matching the given level shapes"""
    levels = [image]
    for shape in shapes[1:]:
        prev = levels[-1]
        sigma = 0.5 * prev.shape[0] / shape[0]
        levels.append(resize(ndimage.gaussian_filter(prev, sigma), shape))
    return levels


def extend_flow(plane: np.ndarray, known: np.ndarray,
                iterations: int = config.INPAINT_ITERATIONS) -> np.ndarray:
    """
    Fill a field outside `known` smoothly from its values inside

    Normalized convolution gives the initial fill; Jacobi diffusion with the known
    values held fixed smooths it.
    """
    if known.all():
        return plane
    sigma = max(plane.shape) / 8.0
    weight = ndimage.gaussian_filter(known.astype(np.float64), sigma)
    spread = ndimage.gaussian_filter(np.where(known, plane, 0.0), sigma)
    filled = np.divide(spread, weight, out=np.zeros_like(spread), where=weight > 1e-12)
    out = np.where(known, plane, filled)

    kernel = np.array([[0.0, 0.25, 0.0], [0.25, 0.0, 0.25], [0.0, 0.25, 0.0]])
    for _ in range(iterations):
        out = np.where(known, plane, ndimage.convolve(out, kernel, mode="nearest"))
    return out


def _diffuse(increment: np.ndarray, confidence: np.ndarray, sigma: float, floor: float) -> np.ndarray:
    """Confidence-weighted Gaussian diffusion of a flow increment"""
    num = ndimage.gaussian_filter(confidence * increment, sigma)
    den = ndimage.gaussian_filter(confidence, sigma)
    return np.divide(num, den, out=np.zeros_like(num), where=den > floor)


def _refine_level(a: np.ndarray, b: np.ndarray, u: np.ndarray, v: np.ndarray,
                  weight_mask: Optional[np.ndarray], params: FlowParams, iterations: int,
                  sigma: float, median_size: int = 0):
    """Gauss-Newton iterations at one pyramid level"""
    height, width = a.shape
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    grad_ay, grad_ax = np.gradient(a)

    for _ in range(iterations):
        sx, sy = xx + u, yy + v
        b_warp = ndimage.map_coordinates(b, [sy, sx], order=1, mode="nearest")
        inside = (sx >= 0) & (sx <= width - 1) & (sy >= 0) & (sy <= height - 1)
        grad_by, grad_bx = np.gradient(b_warp)
        ix = 0.5 * (grad_ax + grad_bx)
        iy = 0.5 * (grad_ay + grad_by)
        it = b_warp - a

        # IRLS weight of the truncated quadratic; the central differences at a pixel
        # read its 4-neighbors, so those must be inliers as well
        inlier = ((it * it) < params.beta) & inside
        inlier = ndimage.binary_erosion(inlier, structure=NEIGHBORS, border_value=1)
        weight = inlier.astype(np.float64)
        if weight_mask is not None:
            weight *= weight_mask
        total = float(weight.sum())
        if total <= 0.0:
            break

        j11 = ndimage.gaussian_filter(weight * ix * ix, sigma)
        j12 = ndimage.gaussian_filter(weight * ix * iy, sigma)
        j22 = ndimage.gaussian_filter(weight * iy * iy, sigma)
        r1 = -ndimage.gaussian_filter(weight * ix * it, sigma)
        r2 = -ndimage.gaussian_filter(weight * iy * it, sigma)

        eps = TIKHONOV_FRACTION * float((weight * (ix * ix + iy * iy)).sum()) / total
        if eps <= 0.0:
            break
        a11, a22 = j11 + eps, j22 + eps
        det = a11 * a22 - j12 * j12
        du = (a22 * r1 - j12 * r2) / det
        dv = (a11 * r2 - j12 * r1) / det

        confidence = j11 + j22
        floor = 1e-6 * eps
        du = np.clip(_diffuse(du, confidence, sigma, floor), -MAX_INCREMENT, MAX_INCREMENT)
        dv = np.clip(_diffuse(dv, confidence, sigma, floor), -MAX_INCREMENT, MAX_INCREMENT)
        u = u + du
        v = v + dv

        if median_size > 1:
            u = ndimage.median_filter(u, size=median_size, mode="nearest")
            v = ndimage.median_filter(v, size=median_size, mode="nearest")
    return u, v


def _rescale_flow(u: np.ndarray, v: np.ndarray, shape):
    """Resample a flow to another level, scaling the displacements with the grid"""
    if u.shape == tuple(shape):
        return u, v
    sy, sx = shape[0] / u.shape[0], shape[1] / u.shape[1]
    return resize(u, shape) * sx, resize(v, shape) * sy


def _prepare(frame_a, frame_b, mask):
    """Luminance planes and mask bits, shape-checked"""
    a = to_luminance(frame_a)
    b = to_luminance(frame_b)
    check_same_shape(a, b, names=["frame_a", "frame_b"])
    bits = None
    if mask is not None:
        bits = mask.bits if isinstance(mask, RegionMask) else np.asarray(mask, dtype=bool)
        check_same_shape(a, bits, names=["frame", "mask"])
    return a, b, bits


def estimate_flow(frame_a: np.ndarray, frame_b: np.ndarray,
                  mask: Union[RegionMask, np.ndarray, None] = None,
                  params: Optional[FlowParams] = None,
                  initial: Optional[FlowField] = None) -> FlowField:
    """
    Estimate v with I_b(x + v(x)) ~ I_a(x) on the grid of frame_a

    Dense estimate with a local window of params.smoothing_weight pixels; whole-domain
    fields are median filtered, which keeps motion discontinuities sharp.

    Args:
        frame_a: Reference frame (the flow lives on its grid)
        frame_b: Target frame
        mask: Region restricting the data term (None = whole domain)
        params: Flow parameters (defaults from config)
        initial: Starting field; when given only the finest level is refined

    Returns:
        FlowField; zero and flagged degenerate when the mask is empty

    Raises:
        DimensionMismatchError: If frames, mask or initial field disagree in shape
    """
    params = params or FlowParams()
    a, b, bits = _prepare(frame_a, frame_b, mask)
    if bits is not None and not bits.any():
        logger.warning("Empty mask passed to flow estimation; returning zero field")
        return FlowField.zeros(a.shape, degenerate=True)
    if initial is not None:
        check_same_shape(a, initial.u, names=["frame", "initial"])

    if initial is not None:
        shapes = [a.shape]
        u, v = initial.u.copy(), initial.v.copy()
    else:
        shapes = pyramid_shapes(a.shape, params)
        u = np.zeros(shapes[-1])
        v = np.zeros(shapes[-1])

    pyr_a = build_pyramid(a, shapes)
    pyr_b = build_pyramid(b, shapes)
    soft_mask = bits.astype(np.float64) if bits is not None else None
    median_size = params.median_filter_size if bits is None else 0

    for level in range(len(shapes) - 1, -1, -1):
        shape = shapes[level]
        u, v = _rescale_flow(u, v, shape)
        level_mask = resize(soft_mask, shape) if soft_mask is not None else None
        u, v = _refine_level(pyr_a[level], pyr_b[level], u, v, level_mask, params,
                             params.iterations_per_level, params.smoothing_weight, median_size)

    if bits is not None:
        u = extend_flow(u, bits)
        v = extend_flow(v, bits)
    return FlowField(u, v)


def estimate_region_flow(frame_a: np.ndarray, frame_b: np.ndarray,
                         mask: Union[RegionMask, np.ndarray, None] = None,
                         params: Optional[FlowParams] = None) -> FlowField:
    """
    Smooth flow of one region, or of the whole grid, on the grid of frame_a

    Increments are diffused at params.region_smoothing times the size of each pyramid
    level, so the field varies on the scale of the whole frame rather than of a local
    window. The levels stop at params.region_finest_level and the result is resampled
    to the full grid. The null hypothesis (mask None) and both region hypotheses use
    this estimator: a region covering the grid gives the null flow.

    Args:
        frame_a: Reference frame (the flow lives on its grid)
        frame_b: Target frame
        mask: Region restricting the data term (None = whole domain)
        params: Flow parameters (defaults from config)

    Returns:
        FlowField extended outside the mask; zero and flagged degenerate for an empty mask

    Raises:
        DimensionMismatchError: If frames and mask disagree in shape
    """
    params = params or FlowParams()
    a, b, bits = _prepare(frame_a, frame_b, mask)
    if bits is not None and not bits.any():
        return FlowField.zeros(a.shape, degenerate=True)

    shapes = pyramid_shapes(a.shape, params)
    finest = min(params.region_finest_level, len(shapes) - 1)
    pyr_a = build_pyramid(a, shapes)
    pyr_b = build_pyramid(b, shapes)
    soft_mask = bits.astype(np.float64) if bits is not None else None

    u = np.zeros(shapes[-1])
    v = np.zeros(shapes[-1])
    for level in range(len(shapes) - 1, finest - 1, -1):
        shape = shapes[level]
        u, v = _rescale_flow(u, v, shape)
        level_mask = resize(soft_mask, shape) if soft_mask is not None else None
        sigma = params.region_smoothing * min(shape)
        u, v = _refine_level(pyr_a[level], pyr_b[level], u, v, level_mask, params,
                             params.iterations_per_level, sigma)

    if soft_mask is not None:
        known = resize(soft_mask, shapes[finest]) >= 0.5
        if known.any():
            u = extend_flow(u, known)
            v = extend_flow(v, known)
    u, v = _rescale_flow(u, v, a.shape)
    return FlowField(u, v)
