"""
Output handler package initialization
"""
from qmd.output_handler.file_manager import FileManager
from qmd.output_handler.raster import read_raster, write_flow, write_raster, write_residual
from qmd.output_handler.trace_writer import (
    COMPARISON_COLUMNS,
    GLR_COLUMNS,
    SWEEP_COLUMNS,
    TRACE_COLUMNS,
    write_comparison,
    write_glr_trace,
    write_sweep,
    write_trace,
)

__all__ = [
    "COMPARISON_COLUMNS",
    "FileManager",
    "GLR_COLUMNS",
    "SWEEP_COLUMNS",
    "TRACE_COLUMNS",
    "read_raster",
    "write_comparison",
    "write_flow",
    "write_glr_trace",
    "write_raster",
    "write_residual",
    "write_sweep",
    "write_trace",
]
