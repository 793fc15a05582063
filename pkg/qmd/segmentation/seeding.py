"""
Region seeding by two-class clustering of cumulative displacements
"""
import logging

import numpy as np
from sklearn.cluster import KMeans

from qmd import config
from qmd.errors import check_same_shape
from qmd.flow.types import Warp
from qmd.frames import RegionMask

logger = logging.getLogger(__name__)


def fallback_disc(shape, frame_index: int = 0, area_fraction: float = config.SEED_DISC_AREA) -> RegionMask:
    """Centered disc covering area_fraction of the grid, flagged degenerate"""
    height, width = shape[:2]
    radius = np.sqrt(area_fraction * height * width / np.pi)
    yy, xx = np.mgrid[0:height, 0:width]
    cy, cx = (height - 1) / 2.0, (width - 1) / 2.0
    bits = (yy - cy) ** 2 + (xx - cx) ** 2 <= radius ** 2
    return RegionMask(bits, frame_index, degenerate=True)


def init_region(cum_flow_fwd: Warp, cum_flow_bwd: Warp, seed: int = config.SEED,
                restarts: int = config.KMEANS_RESTARTS, frame_index: int = 0) -> RegionMask:
    """
    Seed the object region from cumulative warps

    Each pixel gets the 4-vector (forward dx, dy, backward dx, dy); k-means splits the
    grid into two motion clusters and the smaller one is the object. Equal areas go to
    the cluster with the larger mean motion. A single motion cluster yields the
    fallback disc.

    Args:
        cum_flow_fwd: Accumulated warp in one time direction
        cum_flow_bwd: Accumulated warp in the other direction
        seed: Clustering seed
        restarts: k-means restarts
        frame_index: Index stamped on the mask

    Returns:
        RegionMask, degenerate when no motion split exists
    """
    check_same_shape(cum_flow_fwd.map_x, cum_flow_bwd.map_x, names=["cum_flow_fwd", "cum_flow_bwd"])
    shape = cum_flow_fwd.shape
    fwd = cum_flow_fwd.displacement()
    bwd = cum_flow_bwd.displacement()
    features = np.stack([fwd.u.ravel(), fwd.v.ravel(), bwd.u.ravel(), bwd.v.ravel()], axis=1)

    spread = float(np.ptp(features, axis=0).max())
    if spread < config.DEGENERATE_SPREAD:
        logger.warning(f"Uniform displacement (spread {spread:.3f} px); using fallback seed")
        return fallback_disc(shape, frame_index)

    kmeans = KMeans(n_clusters=2, n_init=restarts, random_state=seed)
    labels = kmeans.fit_predict(features)
    centers = kmeans.cluster_centers_
    if np.linalg.norm(centers[0] - centers[1]) < config.DEGENERATE_SPREAD or len(set(labels)) < 2:
        logger.warning("Motion clusters coincide; using fallback seed")
        return fallback_disc(shape, frame_index)

    areas = np.bincount(labels, minlength=2)
    if areas[0] == areas[1]:
        magnitude = [np.linalg.norm(features[labels == c], axis=1).mean() for c in (0, 1)]
        object_label = int(np.argmax(magnitude))
    else:
        object_label = int(np.argmin(areas))

    bits = (labels == object_label).reshape(shape)
    logger.debug(f"Seed region: {int(bits.sum())} of {bits.size} pixels")
    return RegionMask(bits, frame_index)
