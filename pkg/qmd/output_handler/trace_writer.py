"""
CSV writers for detector traces, sweeps, GLR traces and matched-FAR comparisons
"""
import csv
import logging
import math
from pathlib import Path
from typing import Iterable, List

from qmd.detector.types import TraceRow
from qmd.evaluation.compare import ComparisonRow
from qmd.evaluation.sweep import SweepRow
from qmd.qcd.glr import GlrState

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["n", "log_lambda", "k_star", "F_kstar", "mean_residual", "millis", "evaluations"]
SWEEP_COLUMNS = ["b", "add", "far", "mean_f_measure", "num_false_alarms", "num_misses", "num_runs", "note"]
GLR_COLUMNS = ["n", "lambda_log", "k_star"]
COMPARISON_COLUMNS = ["far", "add_candidate", "add_reference", "candidate_wins"]


def _fmt(value) -> str:
    """Fixed formatting so repeated runs give identical bytes"""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def _write(path: Path, columns: List[str], rows: Iterable[list]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
            count += 1
    logger.info(f"✓ Wrote {count} rows to {path}")
    return path


def write_trace(path: Path, trace: Iterable[TraceRow]) -> Path:
    return _write(path, TRACE_COLUMNS, (
        [r.n, float(r.log_lambda), r.k_star, float(r.f_value), float(r.mean_residual), float(r.millis), r.evaluations]
        for r in trace
    ))


def write_sweep(path: Path, rows: Iterable[SweepRow]) -> Path:
    return _write(path, SWEEP_COLUMNS, (
        [r.b, r.add, r.far, r.mean_f_measure, r.num_false_alarms, r.num_misses, r.num_runs, r.note]
        for r in rows
    ))


def write_glr_trace(path: Path, states: Iterable[GlrState]) -> Path:
    return _write(path, GLR_COLUMNS, ([s.n, float(s.lambda_log), s.k_star] for s in states))


def write_comparison(path: Path, rows: Iterable[ComparisonRow]) -> Path:
    return _write(path, COMPARISON_COLUMNS, (
        [r.far, r.add_candidate, r.add_reference, r.candidate_wins] for r in rows
    ))
