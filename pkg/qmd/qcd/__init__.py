"""
Quickest change detection core: GLR scan, CUSUM recursion and threshold stopping
"""
from qmd.qcd.glr import (
    GlrState,
    SampleLogLikelihoods,
    StoppingRule,
    cusum_update,
    glr_update,
    should_stop,
)

__all__ = [
    "GlrState",
    "SampleLogLikelihoods",
    "StoppingRule",
    "cusum_update",
    "glr_update",
    "should_stop",
]
