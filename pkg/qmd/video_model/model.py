"""
Robust residuals and window log-likelihoods

Between consecutive frames the model is brightness constancy with Gaussian noise,
I_{i+1}(w(x)) = I_i(x) + eta_i(x), scored through the truncated quadratic
rho(r) = min(r^2, beta). Integrals over the grid are means over valid pixels
times the pixel count; pixels invalid under any compared hypothesis are dropped
from all of them.

Window functions take frames [F_0, ..., F_L] and warps [w_0, ..., w_{L-1}]; pair j
compares F_{j+1}(w_j(x)) against F_j(x) on the grid of F_j.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from qmd import config
from qmd.errors import ConfigError, WindowError, check_same_shape
from qmd.flow.types import Warp
from qmd.flow.warping import warp_image
from qmd.frames import RegionMask, to_luminance
from qmd.utils.validator import ConfigValidator

logger = logging.getLogger(__name__)


def rho(x, beta: float):
    """Truncated quadratic min(x^2, beta); works on scalars and arrays"""
    if beta <= 0:
        raise ConfigError(f"beta must be > 0, got {beta}")
    if np.ndim(x) == 0:
        return min(float(x) * float(x), beta)
    x = np.asarray(x, dtype=np.float64)
    return np.minimum(x * x, beta)


@dataclass(frozen=True)
class NoiseModel:
    """Noise standard deviations of background and object pixels, and rho's truncation"""
    sigma_bg: float
    sigma_fg: float
    beta: float

    def __post_init__(self):
        is_valid, errors = ConfigValidator.validate_noise_model(self)
        if not is_valid:
            raise ConfigError("; ".join(errors))

    @classmethod
    def default(cls, dynamic_range: float = config.DYNAMIC_RANGE) -> "NoiseModel":
        sigma = config.SIGMA_FRACTION * dynamic_range
        return cls(sigma, sigma, (config.BETA_FRACTION * dynamic_range) ** 2)

    def with_sigma(self, sigma: float) -> "NoiseModel":
        return NoiseModel(sigma, sigma, self.beta)

    def weight(self, j: int) -> float:
        """1 / (2 sigma_j^2) for region j (0 = background, 1 = object)"""
        sigma = self.sigma_fg if j == 1 else self.sigma_bg
        return 1.0 / (2.0 * sigma * sigma)


@dataclass(frozen=True)
class ResidualField:
    """Per-pixel rho residual with its validity (values are 0 where invalid)"""
    values: np.ndarray
    valid: np.ndarray

    @property
    def area(self) -> int:
        return int(self.values.size)

    @property
    def valid_count(self) -> int:
        return int(self.valid.sum())

    def mean(self, within: Optional[np.ndarray] = None) -> float:
        """Mean over valid pixels (optionally restricted); 0 when none are valid"""
        keep = self.valid if within is None else (self.valid & within)
        count = int(keep.sum())
        return float(self.values[keep].sum() / count) if count else 0.0

    def integral(self, within: Optional[np.ndarray] = None) -> float:
        """Mean over valid pixels times the grid area"""
        return self.mean(within) * self.area


def residual(frame_i: np.ndarray, frame_ip1: np.ndarray, w: Warp, noise: NoiseModel) -> ResidualField:
    """
    rho(I_{i+1}(w(x)) - I_i(x)) on the grid of frame_i

    Raises:
        DimensionMismatchError: If frames or warp disagree in shape
    """
    ref = to_luminance(frame_i)
    target = to_luminance(frame_ip1)
    check_same_shape(ref, target, w.map_x, names=["frame_i", "frame_ip1", "warp"])
    warped = warp_image(target, w)
    values = np.where(warped.valid, rho(warped.values - ref, noise.beta), 0.0)
    return ResidualField(values=values, valid=warped.valid)


def _check_window(frames: Sequence, *chains: Sequence) -> None:
    pairs = len(frames) - 1
    if pairs < 1:
        raise WindowError("Window needs at least one frame pair")
    for chain in chains:
        if len(chain) != pairs:
            raise WindowError(f"Window has {pairs} frame pairs but {len(chain)} warps/masks")


def log_p0_window(frames: Sequence[np.ndarray], warps_null: Sequence[Warp], noise: NoiseModel) -> float:
    """
    Pre-change log density of a window, -sum_i (1 / 2 sigma_bg^2) * integral(Res_i^null)

    Raises:
        WindowError: If the window has no pair or the warp count does not match
    """
    _check_window(frames, warps_null)
    total = 0.0
    for j, w in enumerate(warps_null):
        total += residual(frames[j], frames[j + 1], w, noise).integral()
    return -noise.weight(0) * total


def log_lr_window(frames: Sequence[np.ndarray], warps_bg: Sequence[Warp], warps_fg: Sequence[Warp],
                  masks: Sequence[RegionMask], warps_null: Sequence[Warp], noise: NoiseModel,
                  log_prior: float = 0.0) -> float:
    """
    Window log-likelihood ratio log Lambda_{k,n}

    Null-hypothesis cost minus the two-region cost, plus the region prior term:

        sum_i integral(Res^null) / 2 sigma_bg^2
          - sum_i [integral_{R^0}(Res^0) / 2 sigma_bg^2 + integral_{R^1}(Res^1) / 2 sigma_fg^2]
          + log_prior

    When sigma_fg differs from sigma_bg each object pixel also pays log(sigma_fg / sigma_bg).

    Args:
        frames: Window frames F_0..F_L
        warps_bg: Background warps per pair
        warps_fg: Object warps per pair
        masks: Object masks on the grid of F_0..F_{L-1}
        warps_null: Whole-domain warps per pair
        noise: Noise model
        log_prior: log p(R) term from the segmentation prior

    Returns:
        log Lambda (nats, unnormalized)

    Raises:
        WindowError: If the chains are misaligned
    """
    _check_window(frames, warps_bg, warps_fg, masks, warps_null)
    size_term = math.log(noise.sigma_fg) - math.log(noise.sigma_bg)
    total = 0.0
    for j in range(len(frames) - 1):
        ref, target = frames[j], frames[j + 1]
        res_null = residual(ref, target, warps_null[j], noise)
        res_bg = residual(ref, target, warps_bg[j], noise)
        res_fg = residual(ref, target, warps_fg[j], noise)
        obj = masks[j].bits
        check_same_shape(res_null.values, obj, names=["frame", "mask"])

        valid = res_null.valid & res_bg.valid & res_fg.valid
        count = int(valid.sum())
        if count == 0:
            logger.warning(f"Window pair {j} has no pixel valid under all hypotheses; skipped")
            continue
        scale = res_null.area / count

        null_cost = noise.weight(0) * res_null.values[valid].sum()
        region_cost = (noise.weight(0) * res_bg.values[valid & ~obj].sum()
                       + noise.weight(1) * res_fg.values[valid & obj].sum())
        if size_term != 0.0:
            region_cost += size_term * float((valid & obj).sum())
        total += scale * (null_cost - region_cost)
    return total + log_prior


def estimate_sigma(fields: List[ResidualField], dynamic_range: float = config.DYNAMIC_RANGE) -> float:
    """
    sigma-hat with sigma-hat^2 = pooled mean of the residual fields

    Floored at sqrt(1e-6) * dynamic_range.
    """
    floor = 1e-6 * dynamic_range * dynamic_range
    total = sum(float(f.values[f.valid].sum()) for f in fields)
    count = sum(f.valid_count for f in fields)
    variance = total / count if count else floor
    return math.sqrt(max(variance, floor))
