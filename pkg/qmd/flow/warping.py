"""
Bilinear warping, warp accumulation and region propagation
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from qmd.errors import check_same_shape
from qmd.flow.types import FlowField, Warp
from qmd.frames import RegionMask

logger = logging.getLogger(__name__)

# Sampling positions within this distance outside the grid still count as on-grid
GRID_TOLERANCE = 1e-6


@dataclass(frozen=True)
class WarpedImage:
    """Samples I(w(x)) with the on-grid indicator of each sample"""
    values: np.ndarray
    valid: np.ndarray


def sample_bilinear(plane: np.ndarray, map_x: np.ndarray, map_y: np.ndarray) -> np.ndarray:
    """Bilinear samples of a 2-D plane at (map_x, map_y); off-grid samples clamp to the border"""
    return ndimage.map_coordinates(plane, [map_y, map_x], order=1, mode="nearest")


def on_grid(w: Warp, shape) -> np.ndarray:
    """True where w(x) falls inside the grid of the given shape"""
    height, width = shape[:2]
    return (
        (w.map_x >= -GRID_TOLERANCE) & (w.map_x <= width - 1 + GRID_TOLERANCE)
        & (w.map_y >= -GRID_TOLERANCE) & (w.map_y <= height - 1 + GRID_TOLERANCE)
    )


def warp_image(frame: np.ndarray, w: Warp) -> WarpedImage:
    """
    Sample frame at w(x) by bilinear interpolation

    Args:
        frame: H x W or H x W x C frame
        w: Warp on the output grid

    Returns:
        WarpedImage; samples with w(x) outside the frame are marked invalid
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim == 2:
        values = sample_bilinear(frame, w.map_x, w.map_y)
    else:
        values = np.stack(
            [sample_bilinear(frame[..., c], w.map_x, w.map_y) for c in range(frame.shape[2])],
            axis=-1,
        )
    return WarpedImage(values=values, valid=on_grid(w, frame.shape))


def compose_warp(w_prev: Warp, v_next: FlowField) -> Warp:
    """
    Warp recursion w_{i+1}(x) = w_i(x) + v_i(w_i(x))

    v_next lives on the grid w_prev maps into and is sampled bilinearly at w_prev(x).
    """
    check_same_shape(w_prev.map_x, v_next.u, names=["w_prev", "v_next"])
    du = sample_bilinear(v_next.u, w_prev.map_x, w_prev.map_y)
    dv = sample_bilinear(v_next.v, w_prev.map_x, w_prev.map_y)
    return Warp(w_prev.map_x + du, w_prev.map_y + dv)


def compose_chain(flows, shape) -> list:
    """Accumulated warps [identity, w_1, w_2, ...] along a chain of per-step flows"""
    warps = [Warp.identity(shape)]
    for flow in flows:
        warps.append(compose_warp(warps[-1], flow))
    return warps


def close_mask(bits: np.ndarray) -> np.ndarray:
    """3x3 morphological closing that leaves pixels on the grid border intact"""
    padded = np.pad(bits, 1, mode="edge")
    closed = ndimage.binary_closing(padded, structure=np.ones((3, 3), dtype=bool))
    return closed[1:-1, 1:-1]


def propagate_region(mask: RegionMask, flow_fwd: FlowField,
                     flow_bwd: Optional[FlowField] = None,
                     frame_index: Optional[int] = None) -> RegionMask:
    """
    Carry a mask to the neighboring frame

    flow_fwd maps the mask's grid to the target grid; flow_bwd maps the target grid
    back. The target mask holds pixels y whose pull-back y + flow_bwd(y) lands in the
    mask (bilinear indicator >= 0.5), closed with a 3x3 element. Without flow_bwd the
    pull-back uses -flow_fwd sampled at y.

    Args:
        mask: Mask on the source grid
        flow_fwd: Source -> target flow (on the source grid)
        flow_bwd: Target -> source flow (on the target grid)
        frame_index: Index stamped on the result (defaults to mask.frame_index + 1)

    Returns:
        RegionMask on the target grid
    """
    check_same_shape(mask.bits, flow_fwd.u, names=["mask", "flow_fwd"])
    if flow_bwd is not None:
        check_same_shape(mask.bits, flow_bwd.u, names=["mask", "flow_bwd"])
    index = mask.frame_index + 1 if frame_index is None else frame_index

    if mask.is_empty:
        return RegionMask.empty(mask.shape, index)

    pull = flow_bwd if flow_bwd is not None else flow_fwd.negated()
    pulled = warp_image(mask.bits.astype(np.float64), Warp.from_flow(pull))
    bits = (pulled.values >= 0.5) & pulled.valid
    bits = close_mask(bits)
    return RegionMask(bits, index, mask.degenerate)
