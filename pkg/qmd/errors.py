"""
Exception types raised across the package
"""


class QmdError(Exception):
    """Base class for all package errors"""


class RejectedInputError(QmdError, ValueError):
    """A sample or statistic input is non-finite or otherwise unusable"""


class DimensionMismatchError(QmdError, ValueError):
    """Two grids that must be co-registered have different shapes"""


class WindowError(QmdError, ValueError):
    """A (k, n) window or a frame/warp/mask chain is misaligned or too short"""


class ConfigError(QmdError, ValueError):
    """A configuration value or combination of values is invalid"""


class InputSourceError(QmdError, FileNotFoundError):
    """A frame source is missing or holds no frames"""


def check_same_shape(*arrays, names=None) -> None:
    """
    Raise DimensionMismatchError unless all arrays share their first two dimensions

    Args:
        *arrays: numpy arrays (2-D grids or H x W x C frames)
        names: Optional names used in the error message
    """
    shapes = [tuple(a.shape[:2]) for a in arrays]
    if len(set(shapes)) > 1:
        labels = names or [f"arg{i}" for i in range(len(arrays))]
        detail = ", ".join(f"{n}={s}" for n, s in zip(labels, shapes))
        raise DimensionMismatchError(f"Grid dimensions differ: {detail}")
