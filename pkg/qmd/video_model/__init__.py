"""
Observation model: robust residuals and window log-likelihood ratios
"""
from qmd.video_model.model import (
    NoiseModel,
    ResidualField,
    estimate_sigma,
    log_lr_window,
    log_p0_window,
    residual,
    rho,
)

__all__ = [
    "NoiseModel",
    "ResidualField",
    "estimate_sigma",
    "log_lr_window",
    "log_p0_window",
    "residual",
    "rho",
]
