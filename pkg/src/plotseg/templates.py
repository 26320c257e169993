"""
Marker shape templates and component-to-template matching.

Templates are small binary masks generated analytically (diamond, triangle,
square, circle, cross) or loaded from ``<shape_id>.pgm`` files.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import NoTemplates
from plotseg.components import ConnectedComponent
from raster.images import BinaryImage, binarize, load_image

logger = logging.getLogger(__name__)

STANDARD_SIZE = 11
VARIANT_SIZES = (7, 15)
SEARCH_RADIUS = 2


@dataclass(frozen=True, eq=False)
class ShapeTemplate:
    """
    A marker glyph.

    Attributes
    ----------
    shape_id : str
        Unique name within a library.
    mask : BinaryImage
        Glyph pixels. A placement offset ``(i, j)`` is where the mask's
        top-left pixel lands.
    """

    shape_id: str
    mask: BinaryImage

    def __post_init__(self):
        if self.mask.count() < 1:
            raise ValueError(f"template '{self.shape_id}' has no foreground")

    @property
    def height(self) -> int:
        return self.mask.height

    @property
    def width(self) -> int:
        return self.mask.width

    @property
    def area(self) -> int:
        return self.mask.count()

    @property
    def centroid(self) -> Tuple[float, float]:
        rows, cols = np.nonzero(self.mask.data)
        return float(rows.mean()), float(cols.mean())


def _grid(size: int):
    rows, cols = np.indices((size, size))
    return rows, cols, size // 2


def diamond_mask(size: int) -> np.ndarray:
    rows, cols, m = _grid(size)
    return np.abs(rows - m) + np.abs(cols - m) <= m


def triangle_mask(size: int) -> np.ndarray:
    # apex on top, full base on the last row
    rows, cols, m = _grid(size)
    return np.abs(cols - m) <= np.floor((rows + 1) * m / size)


def square_mask(size: int) -> np.ndarray:
    return np.ones((size, size), dtype=bool)


def circle_mask(size: int) -> np.ndarray:
    rows, cols, m = _grid(size)
    return (rows - m) ** 2 + (cols - m) ** 2 <= (m + 0.25) ** 2


def cross_mask(size: int) -> np.ndarray:
    rows, cols, m = _grid(size)
    half = max(1, size // 5) // 2
    return (np.abs(rows - m) <= half) | (np.abs(cols - m) <= half)


SHAPES: Dict[str, Callable[[int], np.ndarray]] = {
    "diamond": diamond_mask,
    "triangle": triangle_mask,
    "square": square_mask,
    "circle": circle_mask,
    "cross": cross_mask,
}


def make_template(kind: str, size: int = STANDARD_SIZE, shape_id: Optional[str] = None) -> ShapeTemplate:
    if kind not in SHAPES:
        raise ValueError(f"unknown shape '{kind}', expected one of {sorted(SHAPES)}")
    if size < 3 or size % 2 == 0:
        raise ValueError(f"template size must be odd and >= 3, got {size}")
    return ShapeTemplate(shape_id or kind, BinaryImage(SHAPES[kind](size)))


def standard_templates(kinds: Iterable[str] = tuple(SHAPES)) -> List[ShapeTemplate]:
    """The 11-px glyphs, named by their plain shape names."""
    return [make_template(kind) for kind in kinds]


def default_library() -> List[ShapeTemplate]:
    """Standard glyphs plus ``<kind>_7`` and ``<kind>_15`` size variants."""
    library = standard_templates()
    for size in VARIANT_SIZES:
        library.extend(make_template(kind, size, f"{kind}_{size}") for kind in SHAPES)
    return library


def template_index(templates: Sequence[ShapeTemplate]) -> Dict[str, ShapeTemplate]:
    """Map shape ids to templates, rejecting duplicates."""
    index: Dict[str, ShapeTemplate] = {}
    for template in templates:
        if template.shape_id in index:
            raise ValueError(f"duplicate template id '{template.shape_id}'")
        index[template.shape_id] = template
    return index


def load_template_dir(directory: Union[str, Path]) -> List[ShapeTemplate]:
    """Load every ``<shape_id>.pgm`` in ``directory`` (dark pixels are the glyph)."""
    directory = Path(directory)
    paths = sorted(directory.glob("*.pgm"))
    if not paths:
        raise NoTemplates(f"no .pgm templates in {directory}")
    templates = [ShapeTemplate(p.stem, binarize(load_image(p), threshold=128)) for p in paths]
    logger.info(f"Loaded {len(templates)} templates from {directory}")
    return templates


def _overlap(a: np.ndarray, b: np.ndarray, dy: int, dx: int) -> int:
    """Pixels shared by ``a`` and ``b`` shifted by ``(dy, dx)`` relative to ``a``."""
    top, left = max(0, dy), max(0, dx)
    bottom = min(a.shape[0], b.shape[0] + dy)
    right = min(a.shape[1], b.shape[1] + dx)
    if bottom <= top or right <= left:
        return 0
    return int(np.count_nonzero(
        a[top:bottom, left:right] & b[top - dy:bottom - dy, left - dx:right - dx]
    ))


def overlap_f1(a: BinaryImage, b: BinaryImage, radius: int = SEARCH_RADIUS) -> float:
    """
    Best ``2|A & B| / (|A| + |B|)`` over integer shifts within ``radius``.

    Masks are aligned at their top-left corners before shifting; the score is
    symmetric in its arguments.
    """
    total = a.count() + b.count()
    if total == 0:
        return 0.0
    best = 0
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            best = max(best, _overlap(a.data, b.data, dy, dx))
    return 2.0 * best / total


def template_score(component: ConnectedComponent, template: ShapeTemplate) -> float:
    return overlap_f1(component.mask, template.mask)


def classify_component(
    component: ConnectedComponent,
    templates: Sequence[ShapeTemplate],
    match_threshold: float = 0.85,
) -> Optional[str]:
    """
    Name the template a component matches, or ``None`` (unresolved).

    The best template by :func:`overlap_f1` wins (first in library order on
    ties) when its score reaches ``match_threshold``; unresolved components
    are candidates for overlap disambiguation.
    """
    if not templates:
        raise NoTemplates("classify_component needs at least one template")
    best_id, best_score = None, -1.0
    for template in templates:
        score = template_score(component, template)
        if score > best_score:
            best_id, best_score = template.shape_id, score
    logger.debug(f"Component {component.label}: best '{best_id}' F1={best_score:.3f}")
    return best_id if best_score >= match_threshold else None
