"""
Synthetic 2-D plots, non-plot negatives and labelled classifier corpora.

Plots are drawn as ink on a white page: two 1-px axes, tick marks with
digit-glyph labels, marker series stamped from templates and optional speckle.
The returned truth records everything needed to score segmentation and
extraction on the image.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from anneal.annealer import Placement, Templates, template_map
from errors import InfeasibleSpec, NoTemplates
from features.caption import DEFAULT_LEXICON
from plotseg.geometry import BoundingBox
from plotseg.templates import standard_templates
from raster.images import BinaryImage, GrayImage
from synth.drawing import GLYPH_HEIGHT, draw_line, draw_polyline, draw_text, speckle, stamp, text_width

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 10000
MARKER_MARGIN = 2
GUARD_BAND = 2
TICK_SPACING = 25
TICK_LENGTH = 3
NEGATIVE_KINDS = ("speckle", "text", "photo")


@dataclass(frozen=True)
class PlotSpec:
    """
    Layout of one synthetic plot.

    Attributes
    ----------
    canvas : tuple of int
        ``(height, width)``.
    axes : tuple of int, optional
        ``(row, col)`` of the X and Y axes; ``None`` places them near the
        bottom-left corner leaving room for tick labels.
    series : list of (shape_id, count)
    noise : float
        Fraction of canvas pixels turned into random speckle.
    caption : str
    seed : int
    connect_points : bool
        Join each series' markers with a polyline.
    tick_labels : bool
        Draw digit labels beside the tick marks.
    fused_pairs : int
        Extra pairs of overlapping same-shape markers (first series' shape).
    """

    canvas: Tuple[int, int] = (120, 150)
    axes: Optional[Tuple[int, int]] = None
    series: Sequence[Tuple[str, int]] = (("diamond", 10),)
    noise: float = 0.0
    caption: str = ""
    seed: int = 0
    connect_points: bool = False
    tick_labels: bool = True
    fused_pairs: int = 0

    @property
    def axis_position(self) -> Tuple[int, int]:
        if self.axes is not None:
            return self.axes
        height, width = self.canvas
        return height - max(16, height // 7), max(18, width // 8)

    def plotting_box(self) -> BoundingBox:
        """Plotting region as the segmenter will cut it."""
        row, col = self.axis_position
        return BoundingBox(0, col + GUARD_BAND + 1, row - GUARD_BAND - 1, self.canvas[1] - 1)


@dataclass
class PlotTruth:
    """
    Ground truth of a generated plot.

    ``x_axis`` and ``y_axis`` hold ``(rho, theta_deg)`` in the Hough
    convention (rho = col*cos(theta) - row*sin(theta)).
    """

    axis_row: int
    axis_col: int
    x_axis: Tuple[float, float]
    y_axis: Tuple[float, float]
    plotting_region: BoundingBox
    placements: List[Placement] = field(default_factory=list)
    centroids: List[Tuple[float, float]] = field(default_factory=list)
    fused: List[Tuple[int, int]] = field(default_factory=list)
    caption: str = ""

    def to_dict(self) -> Dict:
        return {
            "kind": "plot",
            "axis_row": self.axis_row,
            "axis_col": self.axis_col,
            "x_axis": {"rho": self.x_axis[0], "theta_deg": self.x_axis[1]},
            "y_axis": {"rho": self.y_axis[0], "theta_deg": self.y_axis[1]},
            "plotting_region": self.plotting_region.to_dict(),
            "placements": [
                dict(p.to_dict(), centroid=list(c)) for p, c in zip(self.placements, self.centroids)
            ],
            "fused": [list(pair) for pair in self.fused],
            "caption": self.caption,
        }

    @classmethod
    def from_dict(cls, record: Dict) -> "PlotTruth":
        return cls(
            axis_row=int(record["axis_row"]),
            axis_col=int(record["axis_col"]),
            x_axis=(float(record["x_axis"]["rho"]), float(record["x_axis"]["theta_deg"])),
            y_axis=(float(record["y_axis"]["rho"]), float(record["y_axis"]["theta_deg"])),
            plotting_region=BoundingBox.from_dict(record["plotting_region"]),
            placements=[Placement.from_dict(p) for p in record["placements"]],
            centroids=[tuple(p["centroid"]) for p in record["placements"]],
            fused=[tuple(pair) for pair in record.get("fused", [])],
            caption=record.get("caption", ""),
        )


def _draw_axes(canvas: np.ndarray, row: int, col: int, tick_labels: bool, rng: np.random.Generator):
    height, width = canvas.shape
    draw_line(canvas, row, col, row, width - 3)
    draw_line(canvas, 2, col, row, col)

    for c in range(col + TICK_SPACING, width - 4, TICK_SPACING):
        draw_line(canvas, row + 1, c, row + TICK_LENGTH, c)
        if tick_labels:
            digits = list(rng.integers(0, 10, size=int(rng.integers(1, 3))))
            top = row + TICK_LENGTH + 3
            if top + GLYPH_HEIGHT <= height:
                draw_text(canvas, top, c - text_width(len(digits)) // 2, digits)

    for r in range(row - TICK_SPACING, 3, -TICK_SPACING):
        draw_line(canvas, r, col - TICK_LENGTH, r, col - 1)
        if tick_labels:
            digits = list(rng.integers(0, 10, size=int(rng.integers(1, 3))))
            left = col - TICK_LENGTH - 2 - text_width(len(digits))
            if left >= 0:
                draw_text(canvas, r - GLYPH_HEIGHT // 2, left, digits)


class _Layout:
    """Non-overlapping marker boxes inside the plotting area."""

    def __init__(self, area: BoundingBox, rng: np.random.Generator):
        self.area = area
        self.rng = rng
        self.taken: List[BoundingBox] = []
        self.attempts = 0

    def _free(self, box: BoundingBox) -> bool:
        grown = BoundingBox(box.top - MARKER_MARGIN, box.left - MARKER_MARGIN,
                            box.bottom + MARKER_MARGIN, box.right + MARKER_MARGIN)
        return not any(grown.intersects(t) for t in self.taken)

    def place(self, height: int, width: int) -> Tuple[int, int]:
        while self.attempts < MAX_ATTEMPTS:
            self.attempts += 1
            if self.area.height < height or self.area.width < width:
                break
            i = int(self.rng.integers(self.area.top, self.area.bottom - height + 2))
            j = int(self.rng.integers(self.area.left, self.area.right - width + 2))
            box = BoundingBox(i, j, i + height - 1, j + width - 1)
            if self._free(box):
                self.taken.append(box)
                return i, j
        raise InfeasibleSpec(f"could not place markers without overlap after {MAX_ATTEMPTS} attempts")

    def reserve(self, box: BoundingBox) -> bool:
        inside = (box.top >= self.area.top and box.left >= self.area.left
                  and box.bottom <= self.area.bottom and box.right <= self.area.right)
        if inside and self._free(box):
            self.taken.append(box)
            return True
        return False


def _fused_offset(rng: np.random.Generator, size: int) -> Tuple[int, int]:
    """
    Shift of the second marker of a fused pair: overlapping but clearly distinct.

    Centres end up at least two thirds of a glyph apart (L1), far enough that
    the union no longer passes for a single larger or rounder glyph.
    """
    reach = max(3, size // 2)
    min_separation = max(3, 2 * size // 3)
    while True:
        dy, dx = (int(v) for v in rng.integers(-reach, reach + 1, size=2))
        if max(abs(dy), abs(dx)) >= 3 and abs(dy) + abs(dx) >= min_separation:
            return dy, dx


def gen_plot_image(spec: PlotSpec, templates: Optional[Templates] = None) -> Tuple[GrayImage, PlotTruth]:
    """
    Draw a plot and record its ground truth.

    Raises
    ------
    InfeasibleSpec
        Axes outside the canvas, or markers that cannot be laid out without
        overlapping within 10,000 attempts.
    """
    index = template_map(templates if templates is not None else standard_templates())
    height, width = spec.canvas
    row, col = spec.axis_position
    if not (GUARD_BAND + 4 < row < height - 1 and 1 <= col < width - GUARD_BAND - 5):
        raise InfeasibleSpec(f"axes at ({row}, {col}) do not fit a {height}x{width} canvas")
    for shape_id, count in spec.series:
        if count and shape_id not in index:
            raise NoTemplates(f"no template named '{shape_id}'")

    rng = np.random.default_rng(spec.seed)
    canvas = np.zeros((height, width), dtype=bool)
    _draw_axes(canvas, row, col, spec.tick_labels, rng)

    region = spec.plotting_box()
    # keep markers one pixel clear of the region edges
    area = BoundingBox(region.top + 1, region.left + 1, region.bottom - 1, region.right - 1)
    layout = _Layout(area, rng)

    placements: List[Placement] = []
    fused: List[Tuple[int, int]] = []
    for shape_id, count in spec.series:
        template = index[shape_id]
        series = [Placement(shape_id, *layout.place(template.height, template.width)) for _ in range(count)]
        series.sort(key=lambda p: (p.j, p.i))
        placements.extend(series)

    if spec.fused_pairs:
        if not spec.series:
            raise InfeasibleSpec("fused pairs need at least one series")
        template = index[spec.series[0][0]]
        for _ in range(spec.fused_pairs):
            for _attempt in range(MAX_ATTEMPTS):
                dy, dx = _fused_offset(rng, template.height)
                i = int(rng.integers(area.top, area.bottom - template.height + 2))
                j = int(rng.integers(area.left, area.right - template.width + 2))
                first = Placement(template.shape_id, i, j)
                second = first.shifted(dy, dx)
                pair_box = BoundingBox(
                    min(i, second.i), min(j, second.j),
                    max(i, second.i) + template.height - 1, max(j, second.j) + template.width - 1,
                )
                if layout.reserve(pair_box):
                    fused.append((len(placements), len(placements) + 1))
                    placements.extend([first, second])
                    break
            else:
                raise InfeasibleSpec(f"could not place fused pair after {MAX_ATTEMPTS} attempts")

    for p in placements:
        stamp(canvas, index[p.shape_id].mask.data, p.i, p.j)
    centroids = [p.centroid(index[p.shape_id]) for p in placements]

    if spec.connect_points:
        for shape_id, _count in spec.series:
            points = sorted(
                ((int(round(r)), int(round(c))) for p, (r, c) in zip(placements, centroids) if p.shape_id == shape_id),
                key=lambda rc: (rc[1], rc[0]),
            )
            draw_polyline(canvas, points)

    speckle(canvas, spec.noise, rng)

    truth = PlotTruth(
        axis_row=row,
        axis_col=col,
        x_axis=(float(-row), 90.0),
        y_axis=(float(col), 0.0),
        plotting_region=region,
        placements=placements,
        centroids=[(float(r), float(c)) for r, c in centroids],
        fused=fused,
        caption=spec.caption,
    )
    logger.debug(f"Generated plot seed={spec.seed}: {len(placements)} markers, {len(fused)} fused pairs")
    return GrayImage.from_binary(BinaryImage(canvas)), truth


def gen_negative_image(kind: str, canvas: Tuple[int, int], rng: np.random.Generator) -> GrayImage:
    """
    A non-plot figure.

    ``speckle`` is a random ink field, ``text`` rows of digit glyphs and
    ``photo`` a smooth shaded gradient with sensor-like noise.
    """
    height, width = canvas
    if kind == "speckle":
        ink = np.zeros(canvas, dtype=bool)
        speckle(ink, float(rng.uniform(0.03, 0.12)), rng)
        return GrayImage.from_binary(BinaryImage(ink))
    if kind == "text":
        ink = np.zeros(canvas, dtype=bool)
        top = int(rng.integers(2, 8))
        while top + GLYPH_HEIGHT < height - 2:
            left = int(rng.integers(2, 10))
            while left < width - 20:
                word = list(rng.integers(0, 10, size=int(rng.integers(2, 6))))
                left = draw_text(ink, top, left, word) + int(rng.integers(4, 8))
            top += GLYPH_HEIGHT + int(rng.integers(3, 6))
        return GrayImage.from_binary(BinaryImage(ink))
    if kind == "photo":
        rows, cols = np.indices(canvas, dtype=float)
        angle = rng.uniform(0, np.pi)
        ramp = rows * np.sin(angle) + cols * np.cos(angle)
        ramp = (ramp - ramp.min()) / max(np.ptp(ramp), 1e-9)
        blob_r, blob_c = rng.uniform(0, height), rng.uniform(0, width)
        blob = np.exp(-((rows - blob_r) ** 2 + (cols - blob_c) ** 2) / (2 * (min(canvas) / 4) ** 2))
        shade = 40 + 150 * ramp + 60 * blob + rng.normal(0, 12, size=canvas)
        return GrayImage(np.clip(np.rint(shade), 0, 255).astype(np.uint8))
    raise ValueError(f"unknown negative kind '{kind}', expected one of {NEGATIVE_KINDS}")


POSITIVE_CAPTIONS = (
    "Distribution of {a} against {b}",
    "Slope of {a} as a function of {b}",
    "Plot of {a} versus {b} over the measured range",
    "Scatter plot of {a} on both axes",
    "{a} plotted against {b}; the fitted slope is shown",
)
NEGATIVE_CAPTIONS = (
    "Photograph of the {a} apparatus",
    "Schematic of the {a} assembly",
    "Micrograph of sample {n} after treatment",
    "Table of {a} results for sample {n}",
    "Overview of the {a} workflow",
)
QUANTITIES = ("temperature", "pressure", "yield", "time", "voltage", "density", "strain", "flux")


def make_caption(positive: bool, rng: np.random.Generator, lexicon: Sequence[str] = DEFAULT_LEXICON) -> str:
    a, b = rng.choice(QUANTITIES, size=2, replace=False)
    n = int(rng.integers(1, 40))
    if positive:
        return str(rng.choice(POSITIVE_CAPTIONS)).format(a=a, b=b, n=n)
    caption = str(rng.choice(NEGATIVE_CAPTIONS)).format(a=a, b=b, n=n)
    # some non-plot captions still mention a keyword
    if rng.random() < 0.1:
        caption += f" with its {rng.choice(list(lexicon))}"
    return caption


@dataclass
class CorpusItem:
    name: str
    image: GrayImage
    caption: str
    label: int
    truth: Optional[Dict] = None


def random_plot_spec(rng: np.random.Generator, canvas: Tuple[int, int], caption: str, seed: int) -> PlotSpec:
    kinds = ("diamond", "triangle", "square", "circle", "cross")
    n_series = int(rng.integers(1, 3))
    shapes = rng.choice(kinds, size=n_series, replace=False)
    series = tuple((str(s), int(rng.integers(4, 10))) for s in shapes)
    return PlotSpec(
        canvas=canvas,
        series=series,
        noise=float(rng.uniform(0, 0.004)),
        caption=caption,
        seed=seed,
        connect_points=bool(rng.random() < 0.3),
    )


def build_classifier_corpus(
    n_plots: int,
    n_negatives: int,
    seed: int = 42,
    canvas: Tuple[int, int] = (120, 150),
    lexicon: Sequence[str] = DEFAULT_LEXICON,
) -> List[CorpusItem]:
    """
    Labelled plots (+1) followed by negatives (-1), each with a caption.

    Negative kinds cycle through speckle, text and photo.
    """
    rng = np.random.default_rng(seed)
    items: List[CorpusItem] = []
    for n in range(n_plots):
        caption = make_caption(True, rng, lexicon)
        spec = random_plot_spec(rng, canvas, caption, seed=int(rng.integers(2 ** 31)))
        image, truth = gen_plot_image(spec)
        items.append(CorpusItem(f"plot_{n:04d}", image, caption, 1, truth.to_dict()))
    for n in range(n_negatives):
        kind = NEGATIVE_KINDS[n % len(NEGATIVE_KINDS)]
        caption = make_caption(False, rng, lexicon)
        image = gen_negative_image(kind, canvas, rng)
        items.append(CorpusItem(f"neg_{kind}_{n:04d}", image, caption, -1, {"kind": kind, "caption": caption}))
    logger.info(f"Built corpus: {n_plots} plots, {n_negatives} negatives (seed {seed})")
    return items
