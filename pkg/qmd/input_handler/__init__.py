"""
Input handler package initialization
"""
from qmd.input_handler.frame_reader import FrameDirectoryReader, iter_frames, list_sequences, load_image

__all__ = ["FrameDirectoryReader", "iter_frames", "list_sequences", "load_image"]
