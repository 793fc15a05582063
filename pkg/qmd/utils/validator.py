"""
Configuration validators for flow, noise, detector and synthetic-sequence settings
"""
import math
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from qmd.config import OVERRIDE_PARSERS

BACKGROUND_KINDS = ("static", "translation", "affine")
OBJECT_SHAPES = ("square", "disc", "blob")
OBJECT_MODES = ("start_moving", "enter")


def _positive(value, name: str, errors: List[str]) -> None:
    if value is None or not math.isfinite(value) or value <= 0:
        errors.append(f"'{name}' must be a positive finite number, got {value}")


class ConfigValidator:
    """Validates parameter bundles; every check returns (is_valid, errors)"""

    @staticmethod
    def validate_flow_params(params) -> Tuple[bool, List[str]]:
        """
        Validate FlowParams

        Args:
            params: FlowParams instance

        Returns:
            Tuple of (is_valid, list_of_errors)
        """
        errors = []
        if not isinstance(params.pyramid_levels, int) or params.pyramid_levels < 1:
            errors.append("'pyramid_levels' must be an integer >= 1")
        if not (0.0 < params.scale_factor < 1.0):
            errors.append("'scale_factor' must lie in (0, 1)")
        if not isinstance(params.iterations_per_level, int) or params.iterations_per_level < 1:
            errors.append("'iterations_per_level' must be an integer >= 1")
        _positive(params.smoothing_weight, "smoothing_weight", errors)
        _positive(params.beta, "beta", errors)
        _positive(params.dynamic_range, "dynamic_range", errors)
        _positive(params.region_smoothing, "region_smoothing", errors)
        if not isinstance(params.region_finest_level, int) or params.region_finest_level < 0:
            errors.append("'region_finest_level' must be an integer >= 0")
        return len(errors) == 0, errors

    @staticmethod
    def validate_noise_model(noise) -> Tuple[bool, List[str]]:
        """Validate NoiseModel: sigmas and beta strictly positive"""
        errors = []
        _positive(noise.sigma_bg, "sigma_bg", errors)
        _positive(noise.sigma_fg, "sigma_fg", errors)
        _positive(noise.beta, "beta", errors)
        return len(errors) == 0, errors

    @staticmethod
    def validate_detector_config(cfg) -> Tuple[bool, List[str]]:
        """Validate DetectorConfig, including its nested flow and noise settings"""
        errors = []
        errors.extend(ConfigValidator.validate_flow_params(cfg.flow)[1])
        errors.extend(ConfigValidator.validate_noise_model(cfg.noise)[1])
        if cfg.prior_weight < 0:
            errors.append("'prior_weight' must be >= 0")
        if not (0.0 < cfg.texture_fraction < 1.0):
            errors.append("'texture_fraction' must lie in (0, 1)")
        for name in ("hist_bins_gray", "hist_bins_color", "max_outer_iterations",
                     "sweeps_per_iteration", "kmeans_restarts", "jobs"):
            value = getattr(cfg, name)
            if not isinstance(value, int) or value < 1:
                errors.append(f"'{name}' must be an integer >= 1")
        if cfg.max_window is not None and (not isinstance(cfg.max_window, int) or cfg.max_window < 1):
            errors.append("'max_window' must be an integer >= 1 or none")
        return len(errors) == 0, errors

    @staticmethod
    def validate_overrides(overrides: Mapping[str, str]) -> Tuple[bool, List[str]]:
        """Check that every key is known and every value parses"""
        errors = []
        for key, raw in overrides.items():
            parser = OVERRIDE_PARSERS.get(key)
            if parser is None:
                errors.append(f"Unknown configuration key: '{key}'")
                continue
            try:
                parser(raw)
            except (TypeError, ValueError):
                errors.append(f"Invalid value for '{key}': {raw!r}")
        return len(errors) == 0, errors

    @staticmethod
    def validate_thresholds(thresholds: Sequence[float]) -> Tuple[bool, List[str]]:
        """Thresholds must be a nonempty list of finite numbers"""
        errors = []
        if not thresholds:
            errors.append("Threshold list is empty")
        for b in thresholds:
            if not math.isfinite(b):
                errors.append(f"Threshold must be finite, got {b}")
        return len(errors) == 0, errors

    @staticmethod
    def validate_synth_config(cfg, object_boxes: Optional[Dict[int, tuple]] = None) -> Tuple[bool, List[str]]:
        """
        Validate SynthConfig

        Args:
            cfg: SynthConfig instance
            object_boxes: Optional {frame: (x0, y0, x1, y1)} object bounds for frames where
                the object must lie fully inside the grid

        Returns:
            Tuple of (is_valid, list_of_errors)
        """
        errors = []
        if cfg.width < 16 or cfg.height < 16:
            errors.append("'width' and 'height' must be >= 16")
        if cfg.num_frames < 3:
            errors.append("'num_frames' must be >= 3")
        if cfg.change_frame is not None and not (3 <= cfg.change_frame < cfg.num_frames):
            errors.append(f"'change_frame' must satisfy 3 <= change_frame < num_frames, got {cfg.change_frame}")
        if cfg.background_kind not in BACKGROUND_KINDS:
            errors.append(f"'background_kind' must be one of {BACKGROUND_KINDS}")
        if cfg.object_shape not in OBJECT_SHAPES:
            errors.append(f"'object_shape' must be one of {OBJECT_SHAPES}")
        if cfg.object_mode not in OBJECT_MODES:
            errors.append(f"'object_mode' must be one of {OBJECT_MODES}")
        if not (0.0 < cfg.object_size < 0.5):
            errors.append("'object_size' must lie in (0, 0.5)")
        if cfg.noise_sigma < 0:
            errors.append("'noise_sigma' must be >= 0")
        if cfg.change_frame is not None and math.hypot(*cfg.object_velocity) == 0:
            errors.append("'object_velocity' must be nonzero when a change is configured")

        for frame, (x0, y0, x1, y1) in sorted((object_boxes or {}).items()):
            if x0 < 0 or y0 < 0 or x1 > cfg.width or y1 > cfg.height:
                errors.append(f"Object leaves the frame at frame {frame}")
                break
        return len(errors) == 0, errors
