"""
Synthetic sequences with exact ground truth
"""
from qmd.synth.generator import GroundTruth, SceneGeometry, SynthConfig, band_limited_texture, generate
from qmd.synth.suite import benchmark_suite, suite_configs

__all__ = [
    "GroundTruth",
    "SceneGeometry",
    "SynthConfig",
    "band_limited_texture",
    "benchmark_suite",
    "generate",
    "suite_configs",
]
