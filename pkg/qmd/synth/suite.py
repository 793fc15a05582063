"""
Deterministic benchmark suite of synthetic sequences
"""
import logging
from typing import List, Tuple

import numpy as np

from qmd import config
from qmd.synth.generator import GroundTruth, SynthConfig, generate

logger = logging.getLogger(__name__)

BACKGROUND_CYCLE = ("static", "translation", "affine")
SHAPE_CYCLE = ("square", "disc", "blob")


def suite_configs(seed: int = config.SEED, null_only: bool = False,
                  width: int = config.SYNTH_WIDTH, height: int = config.SYNTH_HEIGHT,
                  size: int = config.SUITE_SIZE, num_null: int = config.SUITE_NULL_SEQUENCES,
                  min_frames: int = config.SUITE_MIN_FRAMES,
                  max_frames: int = config.SUITE_MAX_FRAMES) -> List[SynthConfig]:
    """
    Configurations of the benchmark suite

    The first size - num_null sequences carry a change; change frames are spread
    evenly over each sequence's admissible range. Camera motion, flicker, object
    shape and appearance mode cycle across the suite.

    Args:
        seed: Suite seed
        null_only: Return only the no-change sequences
        width, height: Frame size
        size: Number of sequences
        num_null: Number of no-change sequences
        min_frames, max_frames: Frame-count range

    Returns:
        List of SynthConfig, named seq_00, seq_01, ...
    """
    rng = np.random.default_rng(seed)
    num_change = size - num_null
    configs = []
    for index in range(size):
        num_frames = int(rng.integers(min_frames, max_frames + 1))
        kind = BACKGROUND_CYCLE[index % len(BACKGROUND_CYCLE)]
        angle = float(rng.uniform(0.0, 2.0 * np.pi))
        speed = float(rng.uniform(1.5, 2.5))
        bg_speed = float(rng.uniform(0.1, 0.3))
        bg_angle = float(rng.uniform(0.0, 2.0 * np.pi))

        is_change = index < num_change
        if is_change:
            lo, hi = 20, num_frames - 30
            change_frame = int(round(lo + (hi - lo) * (index + 0.5) / num_change))
        else:
            change_frame = None

        mode = "enter" if index % 4 == 3 else "start_moving"
        velocity = (speed * np.cos(angle), speed * np.sin(angle))
        if mode == "enter":
            # Enter along one axis
            velocity = (speed if angle < np.pi else -speed, 0.0)

        configs.append(SynthConfig(
            width=width,
            height=height,
            num_frames=num_frames,
            change_frame=change_frame,
            background_kind=kind,
            background_velocity=(bg_speed * np.cos(bg_angle), bg_speed * np.sin(bg_angle)),
            background_rotation=0.0015 if kind == "affine" else 0.0,
            background_zoom=0.0005 if kind == "affine" else 0.0,
            flicker_amplitude=6.0 if index % 5 == 2 else 0.0,
            flicker_period=float(rng.uniform(15.0, 30.0)),
            object_shape=SHAPE_CYCLE[index % len(SHAPE_CYCLE)],
            object_size=float(rng.uniform(0.18, 0.28)),
            object_velocity=velocity,
            object_mode=mode,
            noise_sigma=config.SYNTH_NOISE_SIGMA,
            seed=seed * 1000 + index,
            name=config.SEQUENCE_DIR_FORMAT.format(index=index),
        ))

    if null_only:
        configs = [c for c in configs if c.change_frame is None]
    return configs


def benchmark_suite(seed: int = config.SEED, null_only: bool = False,
                    **kwargs) -> List[Tuple[List[np.ndarray], GroundTruth]]:
    """Render every suite sequence; deterministic in seed"""
    configs = suite_configs(seed=seed, null_only=null_only, **kwargs)
    logger.info(f"Rendering {len(configs)} synthetic sequences (seed {seed})")
    return [generate(cfg) for cfg in configs]
