"""
Dense robust flow, warp accumulation, warping and region propagation
"""
from qmd.flow.estimator import estimate_flow, estimate_region_flow, extend_flow, resize
from qmd.flow.types import FlowField, FlowParams, Warp
from qmd.flow.warping import (
    WarpedImage,
    compose_chain,
    compose_warp,
    propagate_region,
    sample_bilinear,
    warp_image,
)

__all__ = [
    "FlowField",
    "FlowParams",
    "Warp",
    "WarpedImage",
    "compose_chain",
    "compose_warp",
    "estimate_flow",
    "estimate_region_flow",
    "extend_flow",
    "propagate_region",
    "resize",
    "sample_bilinear",
    "warp_image",
]
