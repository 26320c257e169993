"""Connected-component labelling and text-candidate grouping."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy import ndimage

from plotseg.geometry import BoundingBox
from raster.images import BinaryImage

logger = logging.getLogger(__name__)

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, eq=False)
class ConnectedComponent:
    """
    One 8-connected ink blob.

    Attributes
    ----------
    label : int
        1-based id, in (top, left) order within the labelled image.
    bbox : BoundingBox
    pixel_count : int
    centroid : tuple of float
        Mean (row, col) of member pixels.
    mask : BinaryImage
        Member pixels cropped to ``bbox``.
    """

    label: int
    bbox: BoundingBox
    pixel_count: int
    centroid: Tuple[float, float]
    mask: BinaryImage

    def shifted(self, rows: int, cols: int) -> "ConnectedComponent":
        """Same component expressed in a coordinate frame offset by ``(rows, cols)``."""
        return ConnectedComponent(
            label=self.label,
            bbox=self.bbox.shift(rows, cols),
            pixel_count=self.pixel_count,
            centroid=(self.centroid[0] + rows, self.centroid[1] + cols),
            mask=self.mask,
        )

    def to_dict(self) -> Dict:
        return {
            "label": self.label,
            "bbox": self.bbox.to_dict(),
            "pixel_count": self.pixel_count,
            "centroid": [float(self.centroid[0]), float(self.centroid[1])],
        }


@dataclass(frozen=True)
class TextBox:
    bbox: BoundingBox
    member_components: Tuple[int, ...]
    mean_gap: float

    def shifted(self, rows: int, cols: int) -> "TextBox":
        return TextBox(self.bbox.shift(rows, cols), self.member_components, self.mean_gap)

    def to_dict(self) -> Dict:
        return {
            "bbox": self.bbox.to_dict(),
            "member_components": list(self.member_components),
            "mean_gap": float(self.mean_gap),
        }

    @classmethod
    def from_dict(cls, record: Dict) -> "TextBox":
        return cls(
            BoundingBox.from_dict(record["bbox"]),
            tuple(int(m) for m in record["member_components"]),
            float(record["mean_gap"]),
        )


def connected_components(img: BinaryImage) -> List[ConnectedComponent]:
    """
    Label 8-connected foreground blobs.

    Components are ordered by bounding-box top, then left, and numbered from 1
    in that order.
    """
    labels, count = ndimage.label(img.data, structure=EIGHT_CONNECTED)
    if count == 0:
        return []

    found = []
    for index, slc in enumerate(ndimage.find_objects(labels), start=1):
        mask = labels[slc] == index
        rows, cols = np.nonzero(mask)
        top, left = slc[0].start, slc[1].start
        bbox = BoundingBox(top, left, slc[0].stop - 1, slc[1].stop - 1)
        centroid = (float(rows.mean()) + top, float(cols.mean()) + left)
        found.append((top, left, index, bbox, int(rows.size), centroid, mask))

    found.sort(key=lambda item: item[:3])
    components = [
        ConnectedComponent(label=i, bbox=bbox, pixel_count=n, centroid=centroid, mask=BinaryImage(mask))
        for i, (_, _, _, bbox, n, centroid, mask) in enumerate(found, start=1)
    ]
    logger.debug(f"Labelled {len(components)} components")
    return components


def _vertical_overlap(a: BoundingBox, b: BoundingBox) -> int:
    return min(a.bottom, b.bottom) - max(a.top, b.top) + 1


def _horizontal_gap(left: ConnectedComponent, right: ConnectedComponent) -> int:
    return right.bbox.left - left.bbox.right - 1


def group_text_candidates(
    components: Sequence[ConnectedComponent],
    gap_tolerance: float = 0.5,
) -> List[TextBox]:
    """
    Chain evenly spaced, vertically aligned components into text boxes.

    Chains grow greedily left to right: the next link is the nearest component
    to the right whose vertical overlap covers at least half the shorter
    height and whose gap does not exceed the median component width. A chain
    of two or more becomes a TextBox when every gap lies within
    ``gap_tolerance`` (relative) of the chain's mean gap. Boxes never overlap.

    Parameters
    ----------
    components : sequence of ConnectedComponent
        Components of one region.
    gap_tolerance : float, optional
        Allowed relative deviation of a gap from the mean gap (default 0.5).

    Returns
    -------
    list of TextBox
    """
    if len(components) < 2:
        return []
    median_width = float(np.median([c.bbox.width for c in components]))
    ordered = sorted(components, key=lambda c: (c.bbox.left, c.bbox.top, c.label))

    used = set()
    boxes: List[TextBox] = []
    for start in ordered:
        if start.label in used:
            continue
        chain = [start]
        members = {start.label}
        while True:
            last = chain[-1]
            best = None
            for cand in ordered:
                if cand.label in used or cand.label in members or cand.bbox.left <= last.bbox.right:
                    continue
                gap = _horizontal_gap(last, cand)
                if gap > median_width:
                    continue
                shorter = min(last.bbox.height, cand.bbox.height)
                if _vertical_overlap(last.bbox, cand.bbox) < 0.5 * shorter:
                    continue
                key = (gap, cand.bbox.top, cand.label)
                if best is None or key < best[0]:
                    best = (key, cand)
            if best is None:
                break
            chain.append(best[1])
            members.add(best[1].label)

        if len(chain) < 2:
            continue
        gaps = [_horizontal_gap(a, b) for a, b in zip(chain, chain[1:])]
        mean_gap = float(np.mean(gaps))
        if any(abs(g - mean_gap) > gap_tolerance * mean_gap for g in gaps):
            continue

        bbox = chain[0].bbox
        for c in chain[1:]:
            bbox = bbox.union(c.bbox)
        if any(bbox.intersects(b.bbox) for b in boxes):
            continue
        used.update(members)
        boxes.append(TextBox(bbox, tuple(c.label for c in chain), mean_gap))

    logger.debug(f"Grouped {len(boxes)} text candidates from {len(components)} components")
    return boxes
