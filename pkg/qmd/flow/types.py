"""
Flow field, warp and flow parameter types
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from qmd import config
from qmd.errors import ConfigError, DimensionMismatchError, RejectedInputError
from qmd.utils.validator import ConfigValidator


@dataclass(frozen=True)
class FlowField:
    """
    Dense displacement v on the grid of the source frame (pixels, [y, x] indexed)

    Attributes:
        u: Horizontal component
        v: Vertical component
        degenerate: Set when the field could not be estimated (empty mask) and is zero
    """
    u: np.ndarray
    v: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.float64)
        v = np.asarray(self.v, dtype=np.float64)
        if u.shape != v.shape or u.ndim != 2:
            raise DimensionMismatchError(f"Flow components differ: u={u.shape}, v={v.shape}")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise RejectedInputError("Flow field contains non-finite values")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @classmethod
    def zeros(cls, shape, degenerate: bool = False) -> "FlowField":
        return cls(np.zeros(shape[:2]), np.zeros(shape[:2]), degenerate)

    @property
    def shape(self):
        return self.u.shape

    @property
    def width(self) -> int:
        return self.u.shape[1]

    @property
    def height(self) -> int:
        return self.u.shape[0]

    def negated(self) -> "FlowField":
        return FlowField(-self.u, -self.v, self.degenerate)

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.u, self.v)


@dataclass(frozen=True)
class Warp:
    """Absolute target coordinates w(x) for every pixel x"""
    map_x: np.ndarray
    map_y: np.ndarray

    def __post_init__(self):
        map_x = np.asarray(self.map_x, dtype=np.float64)
        map_y = np.asarray(self.map_y, dtype=np.float64)
        if map_x.shape != map_y.shape or map_x.ndim != 2:
            raise DimensionMismatchError(f"Warp planes differ: {map_x.shape} vs {map_y.shape}")
        if not (np.all(np.isfinite(map_x)) and np.all(np.isfinite(map_y))):
            raise RejectedInputError("Warp contains non-finite coordinates")
        object.__setattr__(self, "map_x", map_x)
        object.__setattr__(self, "map_y", map_y)

    @classmethod
    def identity(cls, shape) -> "Warp":
        yy, xx = np.mgrid[0:shape[0], 0:shape[1]].astype(np.float64)
        return cls(xx, yy)

    @classmethod
    def from_flow(cls, flow: FlowField) -> "Warp":
        """x + v(x)"""
        base = cls.identity(flow.shape)
        return cls(base.map_x + flow.u, base.map_y + flow.v)

    @property
    def shape(self):
        return self.map_x.shape

    def displacement(self) -> FlowField:
        """w(x) - x"""
        base = Warp.identity(self.shape)
        return FlowField(self.map_x - base.map_x, self.map_y - base.map_y)


@dataclass
class FlowParams:
    """Coarse-to-fine robust flow parameters"""
    pyramid_levels: int = config.PYRAMID_LEVELS
    scale_factor: float = config.SCALE_FACTOR
    iterations_per_level: int = config.ITERATIONS_PER_LEVEL
    smoothing_weight: float = config.SMOOTHING_WEIGHT
    beta: Optional[float] = None
    dynamic_range: float = config.DYNAMIC_RANGE
    median_filter_size: int = field(default=5)
    region_smoothing: float = config.REGION_SMOOTHING_FRACTION
    region_finest_level: int = config.REGION_FINEST_LEVEL

    def __post_init__(self):
        if self.beta is None:
            self.beta = (config.BETA_FRACTION * self.dynamic_range) ** 2
        is_valid, errors = ConfigValidator.validate_flow_params(self)
        if not is_valid:
            raise ConfigError("; ".join(errors))
