"""
Shared fixtures: small textured frames, synthetic sequences and fast detector settings
"""
import numpy as np
import pytest

from qmd.detector import DetectorConfig
from qmd.synth import SynthConfig, band_limited_texture, generate


def shifted_pair(texture: np.ndarray, dx: int, dy: int, size: int, margin: int = 16):
    """(a, b) crops of texture with b(x + (dx, dy)) = a(x)"""
    a = texture[margin:margin + size, margin:margin + size]
    b = texture[margin - dy:margin - dy + size, margin - dx:margin - dx + size]
    return a.copy(), b.copy()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def texture(rng):
    return band_limited_texture(rng, (96, 96))


@pytest.fixture
def small_synth_config():
    """Noiseless 48x48 square that starts moving at frame 6"""
    return SynthConfig(width=48, height=48, num_frames=10, change_frame=6, background_kind="static",
                       object_shape="square", object_size=0.3, object_velocity=(2.0, 0.0),
                       object_start=(0.35, 0.5), noise_sigma=0.0, seed=5, name="small")


@pytest.fixture
def small_sequence(small_synth_config):
    return generate(small_synth_config)


@pytest.fixture
def fast_config():
    """Detector settings cheap enough for 48x48 unit tests"""
    return DetectorConfig.from_overrides(
        {
            "pyramid_levels": 2,
            "iterations_per_level": 5,
            "max_outer_iterations": 3,
            "kmeans_restarts": 2,
            "jobs": 1,
        },
        timing=False,
    )
