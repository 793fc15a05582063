"""
qmd: Quickest Moving Object Detection
Online detection and segmentation of an object that starts to move in a video
with a dynamic background, stopping with minimum delay under a false-alarm
constraint.
"""

__version__ = "1.0.0"
