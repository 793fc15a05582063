"""
Region estimation: seeding, motion ambiguity, blended energy and region competition
"""
from qmd.frames import RegionMask
from qmd.segmentation.ambiguity import motion_ambiguity, texture_energy
from qmd.segmentation.energy import accumulate_f, color_histograms, data_cost, energy_seg, perimeter
from qmd.segmentation.evolution import evolve_region
from qmd.segmentation.seeding import fallback_disc, init_region
from qmd.segmentation.types import (
    ColorHistogramPair,
    EvolutionResult,
    MotionAmbiguity,
    SegEnergyTerms,
)

__all__ = [
    "ColorHistogramPair",
    "EvolutionResult",
    "MotionAmbiguity",
    "RegionMask",
    "SegEnergyTerms",
    "accumulate_f",
    "color_histograms",
    "data_cost",
    "energy_seg",
    "evolve_region",
    "fallback_disc",
    "init_region",
    "motion_ambiguity",
    "perimeter",
    "texture_energy",
]
