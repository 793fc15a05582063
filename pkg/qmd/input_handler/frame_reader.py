"""
Frame Reader - Reads frame directories (frame_%04d.png, mask_%04d.png, manifest.txt)
"""
import logging
import re
from pathlib import Path
from typing import Iterable, Iterator, List, Optional

import numpy as np
from dotenv import dotenv_values
from PIL import Image, UnidentifiedImageError

from qmd import config
from qmd.errors import InputSourceError, RejectedInputError
from qmd.frames import RegionMask
from qmd.synth.generator import GroundTruth

logger = logging.getLogger(__name__)

FRAME_PATTERN = re.compile(r"^frame_(\d+)\.png$")


def load_image(path: Path) -> np.ndarray:
    """
    Load a PNG as float64: H x W for single-channel images, H x W x 3 otherwise

    Raises:
        RejectedInputError: If the file cannot be decoded
    """
    try:
        with Image.open(path) as image:
            if image.mode not in ("L", "RGB"):
                bands = image.getbands()
                image = image.convert("RGB" if len(bands) >= 3 else "L")
            return np.asarray(image, dtype=np.float64)
    except (UnidentifiedImageError, OSError) as e:
        raise RejectedInputError(f"Unreadable image {path}: {e}") from e


class FrameDirectoryReader:
    """Lazy, ordered reader over one sequence directory"""

    def __init__(self, directory: Path):
        """
        Initialize frame reader

        Args:
            directory: Sequence directory holding frame_%04d.png files

        Raises:
            InputSourceError: If the directory is missing or holds no frames
        """
        self.directory = Path(directory)

        if not self.directory.is_dir():
            raise InputSourceError(f"Frame directory not found: {self.directory}")

        numbered = []
        for path in self.directory.iterdir():
            match = FRAME_PATTERN.match(path.name)
            if match:
                numbered.append((int(match.group(1)), path))
        if not numbered:
            raise InputSourceError(f"No frame_XXXX.png files in {self.directory}")

        self.frame_paths: List[Path] = [path for _, path in sorted(numbered)]
        logger.info(f"Found {len(self.frame_paths)} frames in {self.directory}")

    @property
    def name(self) -> str:
        return self.directory.name

    def __len__(self) -> int:
        return len(self.frame_paths)

    def __iter__(self) -> Iterator[np.ndarray]:
        for path in self.frame_paths:
            yield load_image(path)

    def read_frame(self, i: int) -> np.ndarray:
        """Frame with 1-based number i"""
        if not 1 <= i <= len(self.frame_paths):
            raise IndexError(f"Frame {i} outside 1..{len(self.frame_paths)}")
        return load_image(self.frame_paths[i - 1])

    def read_all(self) -> List[np.ndarray]:
        return list(self)

    def read_manifest(self) -> dict:
        """key=value pairs of manifest.txt, or {} when there is none"""
        path = self.directory / config.MANIFEST_FILENAME
        if not path.exists():
            return {}
        return {key: value for key, value in dotenv_values(path).items() if value is not None}

    def read_mask(self, i: int) -> Optional[RegionMask]:
        """Mask of frame i (nonzero = object), or None when the file is absent"""
        path = self.directory / config.MASK_FILENAME_FORMAT.format(index=i)
        if not path.exists():
            return None
        plane = load_image(path)
        if plane.ndim == 3:
            plane = plane.max(axis=2)
        return RegionMask(plane > 0, frame_index=i)

    def ground_truth(self) -> Optional[GroundTruth]:
        """
        Ground truth from the manifest and mask files

        Returns:
            GroundTruth, or None if the directory has no manifest. Frames without
            a mask file get an empty mask.

        Raises:
            RejectedInputError: If change_frame in the manifest is not an integer
        """
        manifest = self.read_manifest()
        if not manifest:
            return None

        raw = manifest.get("change_frame", "none").strip().lower()
        try:
            change_frame = None if raw in ("", "none") else int(raw)
        except ValueError as e:
            raise RejectedInputError(f"Invalid change_frame '{raw}' in {self.directory}") from e

        shape = None
        masks = []
        for i in range(1, len(self) + 1):
            mask = self.read_mask(i)
            if mask is None:
                if shape is None:
                    shape = self.read_frame(1).shape[:2]
                mask = RegionMask.empty(shape, i)
            masks.append(mask)

        return GroundTruth(change_frame=change_frame, masks=masks,
                           name=manifest.get("name", self.name), params=manifest)


def iter_frames(source) -> Iterable[np.ndarray]:
    """Frames of a directory path, a FrameDirectoryReader or an in-memory sequence"""
    if isinstance(source, (str, Path)):
        return FrameDirectoryReader(Path(source))
    return source


def list_sequences(root: Path) -> List[FrameDirectoryReader]:
    """
    Readers for every sequence directory directly under root, sorted by name

    Raises:
        InputSourceError: If root is missing or holds no sequence directories
    """
    root = Path(root)
    if not root.is_dir():
        raise InputSourceError(f"Suite directory not found: {root}")

    readers = []
    for directory in sorted(p for p in root.iterdir() if p.is_dir()):
        try:
            readers.append(FrameDirectoryReader(directory))
        except InputSourceError:
            logger.debug(f"Skipping {directory}: no frames")
    if not readers:
        raise InputSourceError(f"No sequence directories with frames under {root}")
    return readers
