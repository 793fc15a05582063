"""
Matched false-alarm comparison of two sweep curves
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from qmd.evaluation.sweep import SweepRow

logger = logging.getLogger(__name__)


@dataclass
class ComparisonRow:
    far: float
    add_candidate: float
    add_reference: float

    @property
    def candidate_wins(self) -> bool:
        return self.add_candidate <= self.add_reference + 1e-9


def _curve(rows: Sequence[SweepRow]) -> Tuple[np.ndarray, np.ndarray]:
    """(FAR, ADD) points with defined ADD, one per FAR level (lowest ADD kept)"""
    best: Dict[float, float] = {}
    for row in rows:
        if math.isnan(row.add):
            continue
        best[row.far] = min(row.add, best.get(row.far, math.inf))
    fars = np.array(sorted(best))
    return fars, np.array([best[f] for f in fars])


def add_at_far(rows: Sequence[SweepRow], far_levels: Sequence[float]) -> List[float]:
    """
    ADD linearly interpolated at the given FAR levels

    Levels outside the curve's FAR range give NaN.
    """
    fars, adds = _curve(rows)
    out = []
    for level in far_levels:
        if fars.size == 0 or level < fars[0] or level > fars[-1]:
            out.append(math.nan)
        else:
            out.append(float(np.interp(level, fars, adds)))
    return out


def dominates(candidate: Sequence[SweepRow], reference: Sequence[SweepRow],
              far_levels: Optional[Sequence[float]] = None) -> Tuple[bool, List[ComparisonRow]]:
    """
    Whether the candidate curve has ADD <= the reference at every matched FAR level

    By default the levels are the FAR values of both curves inside their common range.

    Returns:
        (dominates, comparison rows); False when no level is shared
    """
    cand_far, _ = _curve(candidate)
    ref_far, _ = _curve(reference)
    if far_levels is None:
        if cand_far.size == 0 or ref_far.size == 0:
            return False, []
        lo, hi = max(cand_far[0], ref_far[0]), min(cand_far[-1], ref_far[-1])
        far_levels = sorted({f for f in np.concatenate([cand_far, ref_far]) if lo <= f <= hi})

    cand_add = add_at_far(candidate, far_levels)
    ref_add = add_at_far(reference, far_levels)
    rows = [ComparisonRow(float(f), a, r) for f, a, r in zip(far_levels, cand_add, ref_add)
            if not (math.isnan(a) or math.isnan(r))]
    result = bool(rows) and all(row.candidate_wins for row in rows)
    logger.info(f"Matched-FAR comparison over {len(rows)} levels: candidate dominates = {result}")
    return result, rows
