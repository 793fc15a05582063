"""
Float32 raster dumps: 8-byte little-endian header (u32 width, u32 height), then planes row-major
"""
import struct
from pathlib import Path
from typing import List

import numpy as np

from qmd.errors import RejectedInputError
from qmd.flow.types import FlowField
from qmd.video_model.model import ResidualField

HEADER = struct.Struct("<II")


def write_raster(path: Path, planes: List[np.ndarray]) -> Path:
    """Write one or more H x W planes of equal shape"""
    planes = [np.asarray(p, dtype="<f4") for p in planes]
    height, width = planes[0].shape
    with Path(path).open("wb") as f:
        f.write(HEADER.pack(width, height))
        for plane in planes:
            f.write(plane.tobytes(order="C"))
    return Path(path)


def read_raster(path: Path) -> List[np.ndarray]:
    """
    Read the planes of a raster file

    Raises:
        RejectedInputError: If the payload is not a whole number of planes
    """
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise RejectedInputError(f"Raster {path} is shorter than its header")
    width, height = HEADER.unpack_from(data)
    payload = np.frombuffer(data, dtype="<f4", offset=HEADER.size)
    plane_size = width * height
    if plane_size == 0 or payload.size % plane_size:
        raise RejectedInputError(f"Raster {path}: {payload.size} values do not fill {width}x{height} planes")
    return [payload[i * plane_size:(i + 1) * plane_size].reshape(height, width).copy()
            for i in range(payload.size // plane_size)]


def write_flow(path: Path, flow: FlowField) -> Path:
    """Two planes: u then v"""
    return write_raster(path, [flow.u, flow.v])


def write_residual(path: Path, field: ResidualField) -> Path:
    """One plane; invalid pixels are written as NaN"""
    return write_raster(path, [np.where(field.valid, field.values, np.nan)])
