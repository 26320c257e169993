"""Random images of overlapping markers with exact ground truth."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from anneal.annealer import Placement, Templates, render, template_map
from errors import InfeasibleSpec, NoTemplates
from plotseg.templates import ShapeTemplate, make_template
from raster.images import BinaryImage

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 10000


def overlap_templates() -> List[ShapeTemplate]:
    """Filled 11-px diamond and triangle, 61 px each."""
    return [make_template("diamond"), make_template("triangle")]


@dataclass(frozen=True)
class OverlapSpec:
    """
    Parameters of one overlap image.

    Attributes
    ----------
    canvas : tuple of int
        ``(height, width)``, default 90x90.
    shape_counts : dict
        Number of markers per template id, placed in key order.
    min_overlap_pairs : int
        Pairs of markers whose masks must share at least one pixel.
    seed : int
    """

    canvas: Tuple[int, int] = (90, 90)
    shape_counts: Dict[str, int] = field(default_factory=lambda: {"diamond": 3, "triangle": 2})
    min_overlap_pairs: int = 1
    seed: int = 0

    def __post_init__(self):
        if sum(self.shape_counts.values()) < 1 or any(n < 0 for n in self.shape_counts.values()):
            raise InfeasibleSpec(f"shape counts must be non-negative and total at least 1: {self.shape_counts}")
        if self.min_overlap_pairs < 0:
            raise InfeasibleSpec("min_overlap_pairs must be >= 0")
        total = sum(self.shape_counts.values())
        if self.min_overlap_pairs > total * (total - 1) // 2:
            raise InfeasibleSpec(f"{total} markers cannot form {self.min_overlap_pairs} overlapping pairs")

    def with_seed(self, seed: int) -> "OverlapSpec":
        return OverlapSpec(self.canvas, dict(self.shape_counts), self.min_overlap_pairs, seed)

    def to_dict(self) -> Dict:
        return {
            "canvas": list(self.canvas),
            "shape_counts": dict(self.shape_counts),
            "min_overlap_pairs": self.min_overlap_pairs,
            "seed": self.seed,
        }


def masks_intersect(a: Placement, b: Placement, index: Dict[str, ShapeTemplate]) -> bool:
    ta, tb = index[a.shape_id], index[b.shape_id]
    top, left = max(a.i, b.i), max(a.j, b.j)
    bottom = min(a.i + ta.height, b.i + tb.height)
    right = min(a.j + ta.width, b.j + tb.width)
    if bottom <= top or right <= left:
        return False
    wa = ta.mask.data[top - a.i:bottom - a.i, left - a.j:right - a.j]
    wb = tb.mask.data[top - b.i:bottom - b.i, left - b.j:right - b.j]
    return bool(np.any(wa & wb))


def overlapping_pairs(placements: Sequence[Placement], templates: Templates) -> int:
    index = template_map(templates)
    return sum(
        masks_intersect(a, b, index)
        for n, a in enumerate(placements)
        for b in placements[n + 1:]
    )


def gen_overlap_image(
    spec: OverlapSpec,
    templates: Optional[Templates] = None,
) -> Tuple[BinaryImage, List[Placement]]:
    """
    Place the requested markers at seeded-uniform in-bounds offsets.

    Whole layouts are re-sampled until at least ``min_overlap_pairs`` pairs of
    masks intersect.

    Returns
    -------
    image : BinaryImage
        OR-rendering of the truth placements.
    truth : list of Placement

    Raises
    ------
    InfeasibleSpec
        A template does not fit the canvas, or no layout met the overlap
        requirement within 10,000 attempts.
    """
    index = template_map(templates if templates is not None else overlap_templates())
    height, width = spec.canvas
    for shape_id, count in spec.shape_counts.items():
        if count and shape_id not in index:
            raise NoTemplates(f"no template named '{shape_id}'")
        if count and (index[shape_id].height > height or index[shape_id].width > width):
            raise InfeasibleSpec(f"template '{shape_id}' does not fit a {height}x{width} canvas")

    rng = np.random.default_rng(spec.seed)
    for attempt in range(1, MAX_ATTEMPTS + 1):
        truth = []
        for shape_id, count in spec.shape_counts.items():
            template = index.get(shape_id)
            for _ in range(count):
                i = int(rng.integers(0, height - template.height + 1))
                j = int(rng.integers(0, width - template.width + 1))
                truth.append(Placement(shape_id, i, j))
        if overlapping_pairs(truth, index) >= spec.min_overlap_pairs:
            logger.debug(f"Overlap layout found after {attempt} attempts (seed {spec.seed})")
            return render(truth, index, height, width), truth
    raise InfeasibleSpec(
        f"no layout with {spec.min_overlap_pairs} overlapping pairs after {MAX_ATTEMPTS} attempts"
    )
