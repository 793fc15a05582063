"""
Fast change-time statistic F_{k,n} from whole-domain residual moments

    F_{k,n} = sum_{i=k}^{n} exp{ -(1/|Omega|) integral [ (Res_i - mu_1)^2 / sigma_1^2
                                                        - (Res_i - mu_0)^2 / sigma_0^2 ] }

with (mu_0, sigma_0) pooled over frames 2..k and (mu_1, sigma_1) over k+1..n. The
normalized integral of (Res_i - mu)^2 equals var_i + (mean_i - mu)^2, so F needs only
per-frame moments.
"""
import logging
import math

from qmd import config
from qmd.detector.types import FStatistic, ResidualSummary
from qmd.errors import WindowError

logger = logging.getLogger(__name__)

FIRST_RESIDUAL_FRAME = 2


def f_statistic(summary: ResidualSummary, k: int, n: int) -> FStatistic:
    """
    Evaluate F_{k,n}

    Args:
        summary: Moments of Res^NL for frames 2..n
        k: Candidate change frame, 2 <= k < n
        n: Current frame

    Returns:
        FStatistic; floored is set when a standard deviation was raised to SIGMA_FLOOR

    Raises:
        WindowError: If k, n are out of range or residual moments are missing
    """
    if not (FIRST_RESIDUAL_FRAME <= k < n):
        raise WindowError(f"F statistic requires 2 <= k < n, got k={k}, n={n}")
    missing = [i for i in range(FIRST_RESIDUAL_FRAME, n + 1) if i not in summary.means]
    if missing:
        raise WindowError(f"Residual moments missing for frames {missing}")

    mu0, var0 = summary.pooled(FIRST_RESIDUAL_FRAME, k)
    mu1, var1 = summary.pooled(k + 1, n)
    floor = config.SIGMA_FLOOR ** 2
    floored = var0 < floor or var1 < floor
    var0, var1 = max(var0, floor), max(var1, floor)

    total = 0.0
    for i in range(k, n + 1):
        spread = summary.variances[i]
        post = (spread + (summary.means[i] - mu1) ** 2) / var1
        pre = (spread + (summary.means[i] - mu0) ** 2) / var0
        total += math.exp(min(-(post - pre), config.EXPONENT_CLIP))
    return FStatistic(value=total, floored=floored)
