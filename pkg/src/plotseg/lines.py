"""Erase straight lines from a region so that only the markers remain."""

import logging
from typing import Sequence

import numpy as np

from features.hough import LineSegment
from plotseg.components import connected_components
from raster.images import BinaryImage

logger = logging.getLogger(__name__)


def line_band(shape, lines: Sequence[LineSegment], thickness: float) -> np.ndarray:
    """Boolean mask of pixels within ``thickness`` of any line."""
    rows, cols = np.indices(shape)
    band = np.zeros(shape, dtype=bool)
    for line in lines:
        band |= line.distance(rows, cols) <= thickness
    return band


def remove_lines(
    region: BinaryImage,
    lines: Sequence[LineSegment],
    thickness: int = 1,
    marker_max_area: int = 400,
) -> BinaryImage:
    """
    Erase ink lying within ``thickness`` of the given lines.

    Ink belonging to a component whose bounding box is at most
    ``marker_max_area`` survives unless the whole component lies inside the
    band. So does erased ink bridging the small
    fragments a line leaves when it cuts through a marker: pixels of the band
    inside such a fragment's box, grown by the band width, are restored.
    The output never gains pixels.

    Parameters
    ----------
    region : BinaryImage
    lines : sequence of LineSegment
        Lines detected in this region, in its coordinates.
    thickness : int, optional
        Half-width of the erased band in pixels (default 1).
    marker_max_area : int, optional
        Largest bounding-box area treated as a marker (default 400).

    Returns
    -------
    BinaryImage
        Same dimensions as ``region``.
    """
    if not lines:
        return region

    data = region.data
    shape = data.shape
    erase = data & line_band(shape, lines, thickness)
    if not erase.any():
        return region

    protect = np.zeros(shape, dtype=bool)
    for comp in connected_components(region):
        if comp.bbox.area > marker_max_area:
            continue
        inside = comp.bbox.crop(erase) & comp.mask.data
        # a component lying wholly in the band is the line itself
        if np.count_nonzero(inside) < comp.pixel_count:
            comp.bbox.crop(protect)[...] |= comp.mask.data

    residual = BinaryImage(data & ~erase)
    reach = 2 * int(np.ceil(thickness)) + 1
    for fragment in connected_components(residual):
        if fragment.bbox.area > marker_max_area:
            continue
        grown = fragment.bbox.expand(reach, shape[0], shape[1])
        grown.crop(protect)[...] |= grown.crop(erase)

    kept = data & ~(erase & ~protect)
    logger.debug(
        f"remove_lines: {len(lines)} lines, erased {int(np.count_nonzero(data) - np.count_nonzero(kept))} px"
    )
    return BinaryImage(kept)
