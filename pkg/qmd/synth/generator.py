"""
Synthetic sequence generator with exact ground truth

A band-limited noise texture is viewed through a per-frame background transform
(static, translating or affine camera). An object with its own texture is part of
the static scene before the change frame (or outside the view) and moves relative
to the background from the change frame on. Frames carry independent Gaussian
noise and an optional sinusoidal illumination flicker.

Frame numbers are 1-based; returned lists are 0-based (frames[i - 1] is frame i).
"""
import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import ndimage

from qmd import config
from qmd.errors import ConfigError
from qmd.flow.types import FlowField
from qmd.frames import RegionMask
from qmd.utils.validator import ConfigValidator

logger = logging.getLogger(__name__)

TEXTURE_MEAN = 128.0
TEXTURE_STD = 35.0
TEXTURE_OCTAVES = (1.5, 3.0, 6.0)
FLICKER_SCALE = 16.0  # Spatial sigma of the flicker pattern


@dataclass
class SynthConfig:
    """Parameters of one synthetic sequence"""
    width: int = config.SYNTH_WIDTH
    height: int = config.SYNTH_HEIGHT
    num_frames: int = 60
    change_frame: Optional[int] = 30
    background_kind: str = "static"
    background_velocity: Tuple[float, float] = (0.0, 0.0)
    background_rotation: float = 0.0  # rad per frame (affine)
    background_zoom: float = 0.0  # relative scale change per frame (affine)
    flicker_amplitude: float = 0.0
    flicker_period: float = 20.0
    object_shape: str = "square"
    object_size: float = 0.2  # side / diameter as a fraction of min(width, height)
    object_velocity: Tuple[float, float] = (2.0, 0.0)
    object_mode: str = "start_moving"
    object_start: Tuple[float, float] = (0.5, 0.5)  # center as a fraction of width, height
    bounce: bool = True
    noise_sigma: float = config.SYNTH_NOISE_SIGMA
    seed: int = config.SEED
    name: str = "sequence"

    def to_manifest(self) -> Dict[str, str]:
        """Flat key=value view for the ground-truth manifest"""
        out = {}
        for key, value in asdict(self).items():
            if isinstance(value, (tuple, list)):
                value = ",".join(str(v) for v in value)
            out[key] = "none" if value is None else str(value)
        return out


@dataclass
class GroundTruth:
    """Change frame, per-frame object masks and true per-pair flows"""
    change_frame: Optional[int]
    masks: List[RegionMask]
    flows: List[FlowField] = field(default_factory=list)
    name: str = "sequence"
    params: Dict[str, str] = field(default_factory=dict)

    def mask_at(self, frame: int) -> RegionMask:
        """Ground-truth mask of 1-based frame number `frame`"""
        return self.masks[frame - 1]


def band_limited_texture(rng: np.random.Generator, shape) -> np.ndarray:
    """Sum of Gaussian-filtered noise octaves, scaled to TEXTURE_MEAN +- TEXTURE_STD"""
    texture = np.zeros(shape)
    for sigma in TEXTURE_OCTAVES:
        octave = ndimage.gaussian_filter(rng.standard_normal(shape), sigma)
        texture += octave / (octave.std() + 1e-12)
    texture = (texture - texture.mean()) / (texture.std() + 1e-12)
    return TEXTURE_MEAN + TEXTURE_STD * texture


class SceneGeometry:
    """Background transforms and object path of a configuration"""

    def __init__(self, cfg: SynthConfig):
        self.cfg = cfg
        self.center = np.array([(cfg.width - 1) / 2.0, (cfg.height - 1) / 2.0])
        self.half = cfg.object_size * min(cfg.width, cfg.height) / 2.0
        # Guaranteed extent along the motion axis (blobs shrink to 0.75 of half at some angles)
        self.reach = 0.75 * self.half if cfg.object_shape == "blob" else self.half
        self.velocity = np.asarray(cfg.background_velocity, dtype=np.float64)
        if cfg.background_kind == "static":
            self.velocity = np.zeros(2)
        self.affine = cfg.background_kind == "affine"

    def _rotation_scale(self, i: int):
        if not self.affine:
            return np.eye(2)
        angle = i * self.cfg.background_rotation
        scale = 1.0 - i * self.cfg.background_zoom
        c, s = np.cos(angle), np.sin(angle)
        return scale * np.array([[c, -s], [s, c]])

    def to_world(self, i: int, xy: np.ndarray) -> np.ndarray:
        """World (texture) coordinates of frame-i pixel coordinates, xy shape (..., 2)"""
        rs = self._rotation_scale(i)
        return (xy - self.center) @ rs.T + self.center - i * self.velocity

    def to_frame(self, i: int, world: np.ndarray) -> np.ndarray:
        """Frame-i pixel coordinates of world points"""
        rs_inv = np.linalg.inv(self._rotation_scale(i))
        return (world - self.center + i * self.velocity) @ rs_inv.T + self.center

    def object_centers(self) -> List[np.ndarray]:
        """
        Object center in frame coordinates for frames 1..N

        Before the change the object is static in the scene (or, when entering, waits
        outside the view). From the change frame on it moves by object_velocity per
        frame relative to the scene; with bounce set it reflects off the grid border
        once it has fully entered along an axis.
        """
        cfg = self.cfg
        anchor = np.array([cfg.object_start[0] * (cfg.width - 1), cfg.object_start[1] * (cfg.height - 1)])
        velocity = np.asarray(cfg.object_velocity, dtype=np.float64)

        if cfg.object_mode == "enter" and cfg.change_frame is not None:
            # Leading edge is |v| inside the grid at the change frame
            for axis, limit in ((0, cfg.width), (1, cfg.height)):
                if velocity[axis] > 0:
                    anchor[axis] = -self.reach + abs(velocity[axis])
                elif velocity[axis] < 0:
                    anchor[axis] = limit - 1 + self.reach - abs(velocity[axis])
            anchor = anchor - velocity

        # Anchor is given in the coordinates of the frame before the change
        reference = cfg.change_frame - 1 if cfg.change_frame is not None else 1
        world = self.to_world(reference, anchor)
        low = np.array([self.half, self.half])
        high = np.array([cfg.width - 1 - self.half, cfg.height - 1 - self.half])
        direction = np.ones(2)
        entered = np.zeros(2, dtype=bool)

        centers = []
        position = None
        for i in range(1, cfg.num_frames + 1):
            base = self.to_frame(i, world)
            if cfg.change_frame is None or i < cfg.change_frame:
                centers.append(base)
                position = base
                continue
            position = position + (base - self.to_frame(i - 1, world)) + direction * velocity
            for axis in (0, 1):
                inside = low[axis] <= position[axis] <= high[axis]
                entered[axis] |= inside
                if cfg.bounce and entered[axis] and not inside:
                    bound = low[axis] if position[axis] < low[axis] else high[axis]
                    position[axis] = 2.0 * bound - position[axis]
                    direction[axis] = -direction[axis]
            centers.append(position.copy())
        return centers

    def object_boxes(self, centers: List[np.ndarray]) -> Dict[int, tuple]:
        """Bounding boxes of the frames in which the object must lie fully inside the grid"""
        cfg = self.cfg
        if cfg.object_mode == "enter":
            frames = [cfg.num_frames] if cfg.change_frame is not None else []
        else:
            frames = range(1, cfg.num_frames + 1)
        boxes = {}
        for i in frames:
            c = centers[i - 1]
            boxes[i] = (c[0] - self.half, c[1] - self.half, c[0] + self.half + 1, c[1] + self.half + 1)
        return boxes

    def shape_mask(self, center: np.ndarray, phase: float) -> np.ndarray:
        """Object support on the frame grid for a given center"""
        cfg = self.cfg
        yy, xx = np.mgrid[0:cfg.height, 0:cfg.width].astype(np.float64)
        dx, dy = xx - center[0], yy - center[1]
        if cfg.object_shape == "square":
            return (np.abs(dx) <= self.half) & (np.abs(dy) <= self.half)
        radius = np.hypot(dx, dy)
        if cfg.object_shape == "disc":
            return radius <= self.half
        angle = np.arctan2(dy, dx)
        return radius <= self.half * (1.0 + 0.25 * np.sin(3.0 * angle + phase))


def validate(cfg: SynthConfig) -> SceneGeometry:
    """Validate a configuration and return its geometry; raises ConfigError"""
    is_valid, errors = ConfigValidator.validate_synth_config(cfg)
    if not is_valid:
        raise ConfigError("; ".join(errors))
    geometry = SceneGeometry(cfg)
    if not cfg.bounce:
        is_valid, errors = ConfigValidator.validate_synth_config(cfg, geometry.object_boxes(geometry.object_centers()))
        if not is_valid:
            raise ConfigError("; ".join(errors))
    return geometry


def generate(cfg: SynthConfig) -> Tuple[List[np.ndarray], GroundTruth]:
    """
    Render a sequence and its ground truth

    Args:
        cfg: Sequence configuration

    Returns:
        (frames, GroundTruth); frames are float64 H x W arrays, deterministic in cfg.seed

    Raises:
        ConfigError: If the configuration is invalid or the object leaves the frame
    """
    geometry = validate(cfg)
    rng = np.random.default_rng(cfg.seed)
    height, width = cfg.height, cfg.width

    # World texture large enough for the whole camera path
    travel = int(np.ceil(cfg.num_frames * np.abs(geometry.velocity).max())) if geometry.velocity.any() else 0
    margin = travel + max(height, width) // 2 + 8
    background = band_limited_texture(rng, (height + 2 * margin, width + 2 * margin))
    background_coeffs = ndimage.spline_filter(background, order=3, mode="mirror")
    obj_side = int(2 * geometry.half) + 16
    object_texture = band_limited_texture(rng, (obj_side, obj_side))
    flicker_pattern = ndimage.gaussian_filter(rng.standard_normal((height, width)), FLICKER_SCALE)
    flicker_pattern = (flicker_pattern - flicker_pattern.min()) / (np.ptp(flicker_pattern) + 1e-12)
    shape_phase = float(rng.uniform(0.0, 2.0 * np.pi))

    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    grid = np.stack([xx, yy], axis=-1)
    centers = geometry.object_centers()
    change = cfg.change_frame

    frames, masks, flows = [], [], []
    for i in range(1, cfg.num_frames + 1):
        world = geometry.to_world(i, grid)
        frame = ndimage.map_coordinates(
            background_coeffs, [world[..., 1] + margin, world[..., 0] + margin],
            order=3, mode="mirror", prefilter=False,
        )
        if cfg.flicker_amplitude:
            frame = frame + cfg.flicker_amplitude * np.sin(2.0 * np.pi * i / cfg.flicker_period) * flicker_pattern

        support = np.zeros((height, width), dtype=bool)
        if cfg.object_mode == "start_moving" or (change is not None and i >= change):
            c = centers[i - 1]
            support = geometry.shape_mask(c, shape_phase)
            local_y = yy - c[1] + obj_side / 2.0
            local_x = xx - c[0] + obj_side / 2.0
            obj = ndimage.map_coordinates(object_texture, [local_y, local_x], order=3, mode="reflect")
            frame = np.where(support, obj, frame)

        if cfg.noise_sigma > 0:
            frame = frame + rng.normal(0.0, cfg.noise_sigma, size=frame.shape)
        frames.append(frame)

        moving = change is not None and i >= change
        masks.append(RegionMask(support if moving else np.zeros_like(support), frame_index=i))

    for i in range(1, cfg.num_frames):
        here = geometry.to_frame(i + 1, geometry.to_world(i, grid)) - grid
        u, v = here[..., 0].copy(), here[..., 1].copy()
        bits = masks[i - 1].bits
        if bits.any():
            step = centers[i] - centers[i - 1]
            u[bits], v[bits] = step[0], step[1]
        flows.append(FlowField(u, v))

    gt = GroundTruth(change_frame=change, masks=masks, flows=flows, name=cfg.name, params=cfg.to_manifest())
    logger.debug(f"Generated '{cfg.name}': {cfg.num_frames} frames, change at {change}")
    return frames, gt
