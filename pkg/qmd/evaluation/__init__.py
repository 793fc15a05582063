"""
Evaluation: f-measure, run scoring, threshold sweeps and matched-FAR comparison
"""
from qmd.evaluation.compare import ComparisonRow, add_at_far, dominates
from qmd.evaluation.metrics import RunOutcome, RunRecord, f_measure, precision_recall, score_run
from qmd.evaluation.sweep import FAR_NOT_MONOTONE, SweepResult, SweepRow, sweep

__all__ = [
    "ComparisonRow",
    "FAR_NOT_MONOTONE",
    "RunOutcome",
    "RunRecord",
    "SweepResult",
    "SweepRow",
    "add_at_far",
    "dominates",
    "f_measure",
    "precision_recall",
    "score_run",
    "sweep",
]
