"""
Monte-Carlo harness for the GLR stopping rule on scalar Gaussian streams

Streams are N(0, 1) before the change and N(mu, 1) from the change time on.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.stats import norm

from qmd.qcd.glr import GlrState, SampleLogLikelihoods, StoppingRule, glr_update, should_stop

logger = logging.getLogger(__name__)


@dataclass
class GaussianRun:
    """Outcome of one simulated stream"""
    stop_time: Optional[int]
    change_time: int

    @property
    def false_alarm(self) -> bool:
        return self.stop_time is not None and self.stop_time < self.change_time

    @property
    def delay(self) -> Optional[int]:
        if self.stop_time is None or self.false_alarm:
            return None
        return self.stop_time - self.change_time


def gaussian_samples(xs, mu0: float = 0.0, mu1: float = 1.0, sigma: float = 1.0) -> List[SampleLogLikelihoods]:
    """Per-sample log densities of xs under N(mu0, sigma) and N(mu1, sigma)"""
    xs = np.asarray(xs, dtype=np.float64)
    log_p0 = norm.logpdf(xs, loc=mu0, scale=sigma)
    log_p1 = norm.logpdf(xs, loc=mu1, scale=sigma)
    return [SampleLogLikelihoods(float(a), float(b)) for a, b in zip(log_p0, log_p1)]


def simulate_stream(rng: np.random.Generator, length: int, change_time: int, mu: float) -> np.ndarray:
    """Draw x_1..x_length with the mean shifting to mu at change_time (1-based)"""
    xs = rng.standard_normal(length)
    xs[change_time - 1:] += mu
    return xs


def stopping_time(samples: List[SampleLogLikelihoods], threshold_b: float,
                  min_post_samples: int = 2) -> Optional[int]:
    """First n with log Lambda_n >= b, None if the stream ends first"""
    rule = StoppingRule(threshold_b=threshold_b)
    state = GlrState(min_post_samples=min_post_samples)
    for sample in samples:
        state = glr_update(state, sample)
        if should_stop(state, rule):
            return state.n
    return None


def empirical_add(mu: float, threshold_b: float, runs: int = 200, change_time: int = 20,
                  length: int = 200, seed: int = 0) -> float:
    """
    Average detection delay of the GLR rule over Monte-Carlo runs

    Args:
        mu: Post-change mean
        threshold_b: Log-domain threshold
        runs: Number of simulated streams
        change_time: 1-based change time
        length: Samples per stream
        seed: RNG seed

    Returns:
        Mean delay over runs that detected at or after the change (NaN if none)
    """
    rng = np.random.default_rng(seed)
    results = []
    for _ in range(runs):
        xs = simulate_stream(rng, length, change_time, mu)
        stop = stopping_time(gaussian_samples(xs, 0.0, mu), threshold_b)
        results.append(GaussianRun(stop_time=stop, change_time=change_time))

    delays = [r.delay for r in results if r.delay is not None]
    false_alarms = sum(r.false_alarm for r in results)
    logger.debug(f"mu={mu} b={threshold_b}: {len(delays)} detections, {false_alarms} false alarms")
    if not delays:
        return float("nan")
    return float(np.mean(delays))
