"""
GLR change detector over candidate change times

Model
-----
Samples x_1..x_n are iid p0 before an unknown change time k and iid p1 from k
on. The log statistic is

    log Lambda_n = max_k  sum_{i=k}^{n} [log p1(x_i) - log p0(x_i)]

with k ranging over 1..n - min_post_samples + 1. min_post_samples=2 gives the
k < n scan; min_post_samples=1 also admits k = n, and then
max(0, log Lambda_n) is exactly the CUSUM recursion.

Every state is an immutable value, so updates can cross threads freely.

Usage
-----
    state = GlrState()
    for sample in stream:
        state = glr_update(state, sample)
        if should_stop(state, StoppingRule(threshold_b=5.0)):
            print(state.n, state.k_star, state.lambda_log)
"""
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

from qmd import config
from qmd.errors import RejectedInputError


@dataclass(frozen=True)
class SampleLogLikelihoods:
    """Per-sample log densities (nats) under the pre- and post-change laws"""
    log_p0: float
    log_p1: float

    def __post_init__(self):
        if not (math.isfinite(self.log_p0) and math.isfinite(self.log_p1)):
            raise RejectedInputError(
                f"Non-finite sample log-likelihoods: log_p0={self.log_p0}, log_p1={self.log_p1}"
            )

    @property
    def log_ratio(self) -> float:
        return self.log_p1 - self.log_p0


@dataclass(frozen=True)
class StoppingRule:
    """Log-domain threshold b"""
    threshold_b: float

    def __post_init__(self):
        if not math.isfinite(self.threshold_b):
            raise RejectedInputError(f"Threshold must be finite, got {self.threshold_b}")


@dataclass(frozen=True)
class GlrState:
    """
    Scan state after n samples

    Attributes:
        n: Number of samples consumed (1-based index of the newest sample)
        per_k_loglr: Accumulated log-ratio sum_{i=k}^{n} for k = first_k, first_k+1, ..., n
        first_k: Candidate change time stored at per_k_loglr[0]
        lambda_log: Current log Lambda_n (0 while no candidate is admissible)
        k_star: Candidate attaining lambda_log, None while no candidate is admissible
        min_post_samples: Samples a post-change segment must hold (2 gives k < n)
        max_candidates: Optional ring-buffer cap on remembered candidates
    """
    n: int = 0
    per_k_loglr: Tuple[float, ...] = ()
    first_k: int = 1
    lambda_log: float = 0.0
    k_star: Optional[int] = None
    min_post_samples: int = 2
    max_candidates: Optional[int] = field(default=None)

    def __post_init__(self):
        if self.min_post_samples < 1:
            raise RejectedInputError("min_post_samples must be >= 1")
        if self.max_candidates is not None and self.max_candidates < 1:
            raise RejectedInputError("max_candidates must be >= 1 when set")

    def candidates(self):
        """Yield (k, accumulated log-ratio) for the admissible candidates"""
        last_k = self.n - self.min_post_samples + 1
        for offset, value in enumerate(self.per_k_loglr):
            k = self.first_k + offset
            if k > last_k:
                break
            yield k, value


def _check_finite(value: float, what: str) -> None:
    if not math.isfinite(value):
        raise RejectedInputError(f"Non-finite {what}: {value}")


def glr_update(state: GlrState, sample: SampleLogLikelihoods) -> GlrState:
    """
    Consume one sample and return the state for time n+1

    Args:
        state: State valid for time n (GlrState() before the first sample)
        sample: Log-likelihoods of the new sample

    Returns:
        New GlrState with lambda_log and k_star recomputed

    Raises:
        RejectedInputError: If the sample is non-finite
    """
    ratio = sample.log_ratio
    _check_finite(ratio, "log-likelihood ratio")

    n = state.n + 1
    # Candidate k = n joins, then every accumulator gains the new sample
    accumulators = [value + ratio for value in state.per_k_loglr] + [ratio]
    first_k = state.first_k if state.per_k_loglr else n

    if state.max_candidates is not None and len(accumulators) > state.max_candidates:
        dropped = len(accumulators) - state.max_candidates
        accumulators = accumulators[dropped:]
        first_k += dropped

    new_state = replace(state, n=n, per_k_loglr=tuple(accumulators), first_k=first_k)

    best_k, best_value = None, 0.0
    for k, value in new_state.candidates():
        # Strict comparison keeps the smallest k on ties
        if best_k is None or value > best_value:
            best_k, best_value = k, value

    return replace(new_state, lambda_log=best_value if best_k is not None else 0.0, k_star=best_k)


def cusum_update(stat: float, sample: SampleLogLikelihoods) -> float:
    """
    Recursive CUSUM step: max(0, stat + log p1 - log p0)

    Raises:
        RejectedInputError: If stat is non-finite or negative
    """
    _check_finite(stat, "CUSUM statistic")
    if stat < 0:
        raise RejectedInputError(f"CUSUM statistic must be >= 0, got {stat}")
    return max(0.0, stat + sample.log_ratio)


def should_stop(state: GlrState, rule: StoppingRule) -> bool:
    """
    True iff lambda_log >= b (inclusive), from sample MIN_DETECTION_FRAME on

    A statistic built from fewer samples never stops the scan.
    """
    if state.k_star is None or state.n < config.MIN_DETECTION_FRAME:
        return False
    return state.lambda_log >= rule.threshold_b
