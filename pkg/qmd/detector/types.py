"""
Detector configuration and result types
"""
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

import numpy as np

from qmd import config
from qmd.errors import ConfigError, WindowError
from qmd.flow.types import FlowParams
from qmd.frames import RegionMask
from qmd.utils.validator import ConfigValidator
from qmd.video_model.model import NoiseModel


@dataclass
class DetectorConfig:
    """Every tunable of the detectors, with defaults from qmd.config"""
    flow: FlowParams = field(default_factory=FlowParams)
    noise: NoiseModel = field(default_factory=NoiseModel.default)
    estimate_noise: bool = config.ESTIMATE_NOISE
    prior_weight: float = config.PRIOR_WEIGHT
    texture_fraction: float = config.TEXTURE_FRACTION
    hist_bins_gray: int = config.HIST_BINS_GRAY
    hist_bins_color: int = config.HIST_BINS_COLOR
    max_outer_iterations: int = config.MAX_OUTER_ITERATIONS
    sweeps_per_iteration: int = config.SWEEPS_PER_ITERATION
    max_window: Optional[int] = config.MAX_WINDOW
    kmeans_restarts: int = config.KMEANS_RESTARTS
    seed: int = config.SEED
    jobs: int = field(default_factory=config.default_jobs)
    timing: bool = True

    def __post_init__(self):
        is_valid, errors = ConfigValidator.validate_detector_config(self)
        if not is_valid:
            raise ConfigError("; ".join(errors))

    @property
    def dynamic_range(self) -> float:
        return self.flow.dynamic_range

    @property
    def texture_threshold(self) -> float:
        return (self.texture_fraction * self.dynamic_range) ** 2

    @classmethod
    def from_overrides(cls, overrides: Optional[Mapping[str, object]] = None, **extra) -> "DetectorConfig":
        """
        Build a config from the defaults plus key=value overrides

        Args:
            overrides: Mapping of lower-case keys (see config.OVERRIDE_PARSERS) to raw or typed values
            **extra: Fields set directly (for example timing=False)

        Returns:
            DetectorConfig

        Raises:
            ConfigError: On unknown keys, unparsable values or invalid combinations
        """
        overrides = dict(overrides or {})
        is_valid, errors = ConfigValidator.validate_overrides(overrides)
        if not is_valid:
            raise ConfigError("; ".join(errors))
        values = {key: config.OVERRIDE_PARSERS[key](raw) for key, raw in overrides.items()}

        dynamic_range = values.pop("dynamic_range", config.DYNAMIC_RANGE)
        beta = values.pop("beta", None)
        flow = FlowParams(
            pyramid_levels=values.pop("pyramid_levels", config.PYRAMID_LEVELS),
            scale_factor=values.pop("scale_factor", config.SCALE_FACTOR),
            iterations_per_level=values.pop("iterations_per_level", config.ITERATIONS_PER_LEVEL),
            smoothing_weight=values.pop("smoothing_weight", config.SMOOTHING_WEIGHT),
            region_smoothing=values.pop("region_smoothing", config.REGION_SMOOTHING_FRACTION),
            region_finest_level=values.pop("region_finest_level", config.REGION_FINEST_LEVEL),
            beta=beta,
            dynamic_range=dynamic_range,
        )
        default_sigma = config.SIGMA_FRACTION * dynamic_range
        noise = NoiseModel(
            sigma_bg=values.pop("sigma_bg", default_sigma),
            sigma_fg=values.pop("sigma_fg", default_sigma),
            beta=flow.beta,
        )
        values.update(extra)
        return cls(flow=flow, noise=noise, **values)


@dataclass
class WindowHypothesis:
    """Joint segmentation and likelihood of change time k given frames up to n"""
    k: int
    n: int
    log_lambda: float
    mask_n: RegionMask
    converged: bool
    degenerate_seed: bool = False
    outer_iterations: int = 0

    def __post_init__(self):
        if not (2 <= self.k < self.n):
            raise WindowError(f"Window requires 2 <= k < n, got k={self.k}, n={self.n}")


@dataclass
class TraceRow:
    """Per-frame statistics of a detector run"""
    n: int
    log_lambda: float
    k_star: Optional[int]
    f_value: float
    mean_residual: float
    millis: float = 0.0
    evaluations: int = 0


@dataclass
class DetectionResult:
    """
    Outcome of a detector run

    Attributes:
        stopped: Whether the threshold was crossed
        stop_frame: Frame n at which the run stopped (None if exhausted)
        change_estimate: k* at the stop frame
        mask: Object mask at the stop frame
        trace: One TraceRow per processed frame
        evaluations: Total window evaluations
        masks: Mask of the selected window per frame (for threshold replay)
    """
    stopped: bool
    stop_frame: Optional[int]
    change_estimate: Optional[int]
    mask: Optional[RegionMask]
    trace: List[TraceRow] = field(default_factory=list)
    evaluations: int = 0
    masks: Dict[int, RegionMask] = field(default_factory=dict)

    @property
    def final_log_lambda(self) -> float:
        return self.trace[-1].log_lambda if self.trace else 0.0


@dataclass
class FStatistic:
    """F_{k,n} with a flag set when a standard deviation hit the floor"""
    value: float
    floored: bool = False


@dataclass
class ResidualSummary:
    """
    Per-frame moments of the whole-domain residual Res^NL_i (i >= 2)

    Attributes:
        counts: Valid pixel count per frame
        means: Mean residual per frame (the mean-residual trace)
        variances: Population variance per frame
        area: Grid size |Omega|
    """
    counts: Dict[int, int] = field(default_factory=dict)
    means: Dict[int, float] = field(default_factory=dict)
    variances: Dict[int, float] = field(default_factory=dict)
    area: int = 0

    def add(self, i: int, values: np.ndarray, valid: np.ndarray) -> None:
        """Record the moments of frame i's residual field"""
        samples = values[valid]
        self.area = int(values.size)
        self.counts[i] = int(samples.size)
        self.means[i] = float(samples.mean()) if samples.size else 0.0
        self.variances[i] = float(samples.var()) if samples.size else 0.0

    @property
    def frames(self) -> List[int]:
        return sorted(self.means)

    def pooled(self, first: int, last: int):
        """Pooled (mean, variance) of the pixel populations of frames first..last"""
        frames = [i for i in range(first, last + 1) if self.counts.get(i)]
        total = sum(self.counts[i] for i in frames)
        if total == 0:
            return 0.0, 0.0
        mean = sum(self.counts[i] * self.means[i] for i in frames) / total
        second = sum(self.counts[i] * (self.variances[i] + (self.means[i] - mean) ** 2) for i in frames) / total
        return mean, max(second, 0.0)
