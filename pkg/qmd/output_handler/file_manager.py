"""
File Manager - Writes frame directories, masks and manifests
"""
import logging
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np
from PIL import Image

from qmd import config
from qmd.frames import RegionMask
from qmd.synth.generator import GroundTruth

logger = logging.getLogger(__name__)


def _to_uint8(frame: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(frame), 0, 255).astype(np.uint8)


class FileManager:
    """Manages output directory layout and file writing"""

    def __init__(self, output_dir: Path):
        """
        Initialize file manager

        Args:
            output_dir: Root directory for output files
        """
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(exist_ok=True, parents=True)

    def path(self, filename: str) -> Path:
        return self.output_dir / filename

    def sequence_dir(self, name: str) -> Path:
        directory = self.output_dir / name
        directory.mkdir(exist_ok=True, parents=True)
        return directory

    @staticmethod
    def save_frame(path: Path, frame: np.ndarray) -> Path:
        """Write a frame as 8-bit PNG (values rounded and clipped to 0..255)"""
        frame = np.asarray(frame)
        Image.fromarray(_to_uint8(frame)).save(path)
        return path

    @staticmethod
    def save_mask(path: Path, mask: RegionMask) -> Path:
        """Write a mask as single-channel PNG, 255 = object"""
        Image.fromarray(mask.bits.astype(np.uint8) * 255).save(path)
        return path

    @staticmethod
    def save_manifest(directory: Path, values: Mapping[str, object]) -> Path:
        """Write key=value lines, keys sorted"""
        path = Path(directory) / config.MANIFEST_FILENAME
        lines = [f"{key}={'none' if value is None else value}" for key, value in sorted(values.items())]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def save_sequence(self, frames: Sequence[np.ndarray], gt: Optional[GroundTruth] = None,
                      name: Optional[str] = None) -> Path:
        """
        Write one sequence directory: frames, masks and the ground-truth manifest

        Args:
            frames: Frames, frame 1 first
            gt: Ground truth (masks and manifest are written only when given)
            name: Directory name (defaults to gt.name)

        Returns:
            Path to the sequence directory
        """
        directory = self.sequence_dir(name or (gt.name if gt else "sequence"))
        for i, frame in enumerate(frames, start=1):
            self.save_frame(directory / config.FRAME_FILENAME_FORMAT.format(index=i), frame)

        if gt is not None:
            for i, mask in enumerate(gt.masks, start=1):
                self.save_mask(directory / config.MASK_FILENAME_FORMAT.format(index=i), mask)
            manifest = dict(gt.params)
            manifest["name"] = gt.name
            manifest["change_frame"] = gt.change_frame
            manifest["num_frames"] = len(frames)
            self.save_manifest(directory, manifest)

        logger.info(f"✓ Wrote {len(frames)} frames to {directory}")
        return directory

    def save_stop_mask(self, mask: RegionMask) -> Path:
        path = self.save_mask(self.path(config.STOP_MASK_FILENAME), mask)
        logger.info(f"✓ Stop mask saved: {path}")
        return path
