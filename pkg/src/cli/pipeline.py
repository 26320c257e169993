"""
Information extraction from one figure.

classify -> detect axes -> split regions -> group axis text -> erase lines in
the plotting region -> match marker components -> anneal unresolved blobs.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from anneal.annealer import anneal
from cli.settings import Settings
from errors import AnnealError, AxesNotFound, DegenerateRegion
from features.hough import hough_lines
from features.vector import extract_image_features
from plotseg.components import ConnectedComponent, TextBox, connected_components, group_text_candidates
from plotseg.lines import remove_lines
from plotseg.regions import PlotRegions, detect_axes, segment_regions
from plotseg.templates import SHAPES, ShapeTemplate, classify_component
from raster.images import BinaryImage, binarize, load_image
from storage.data_storage import dumps_canonical
from svm.linear_svm import SvmModel, predict

logger = logging.getLogger(__name__)

ORIGINS = ("direct", "annealed")


@dataclass(frozen=True)
class DataPoint:
    shape_id: str
    centroid: Tuple[float, float]
    origin: str

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise ValueError(f"origin must be one of {ORIGINS}, got '{self.origin}'")

    def to_dict(self) -> Dict:
        return {"shape_id": self.shape_id, "centroid": [self.centroid[0], self.centroid[1]], "origin": self.origin}

    @classmethod
    def from_dict(cls, record: Dict) -> "DataPoint":
        row, col = record["centroid"]
        return cls(str(record["shape_id"]), (float(row), float(col)), str(record["origin"]))


@dataclass
class ExtractionResult:
    """
    Everything extracted from one figure.

    ``regions`` is present only when the figure is a plot and its axes were
    found; every data point lies inside ``regions.plotting_region``.
    """

    source: str
    is_plot: bool
    score: Optional[float] = None
    regions: Optional[PlotRegions] = None
    text_boxes: List[TextBox] = field(default_factory=list)
    data_points: List[DataPoint] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    seed: int = 42

    def to_dict(self) -> Dict:
        return {
            "source": self.source,
            "is_plot": self.is_plot,
            "score": self.score,
            "regions": self.regions.to_dict() if self.regions is not None else None,
            "text_boxes": [t.to_dict() for t in self.text_boxes],
            "data_points": [p.to_dict() for p in self.data_points],
            "warnings": list(self.warnings),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, record: Dict) -> "ExtractionResult":
        return cls(
            source=record["source"],
            is_plot=bool(record["is_plot"]),
            score=None if record.get("score") is None else float(record["score"]),
            regions=None if record.get("regions") is None else PlotRegions.from_dict(record["regions"]),
            text_boxes=[TextBox.from_dict(t) for t in record.get("text_boxes", [])],
            data_points=[DataPoint.from_dict(p) for p in record.get("data_points", [])],
            warnings=list(record.get("warnings", [])),
            seed=int(record.get("seed", 42)),
        )

    def to_json(self) -> str:
        return dumps_canonical(self.to_dict(), indent=2)


def _crop(img: BinaryImage, box) -> BinaryImage:
    return BinaryImage(box.crop(img.data).copy())


def anneal_candidates(templates: Sequence[ShapeTemplate], matched: Sequence[str]) -> List[ShapeTemplate]:
    """Templates seen in this plot, else the plain-named standard shapes, else all."""
    seen = [t for t in templates if t.shape_id in set(matched)]
    if seen:
        return seen
    standard = [t for t in templates if t.shape_id in SHAPES]
    return standard or list(templates)


class PlotExtractor:
    """
    Extraction pipeline bound to a model, a template library and settings.

    Parameters
    ----------
    templates : sequence of ShapeTemplate
    settings : Settings
    model : SvmModel, optional
        Without a model every input is treated as a plot.
    invert : bool
        Light ink on a dark background.
    """

    def __init__(
        self,
        templates: Sequence[ShapeTemplate],
        settings: Settings = Settings(),
        model: Optional[SvmModel] = None,
        invert: bool = False,
    ):
        self.templates = list(templates)
        self.settings = settings
        self.model = model
        self.invert = invert

    def extract(self, path: Union[str, Path], caption: Optional[str] = None) -> ExtractionResult:
        gray = load_image(path)
        seed = self.settings.anneal.seed
        result = ExtractionResult(source=str(path), is_plot=True, seed=seed)

        if self.model is not None:
            vector = extract_image_features(gray, caption, self.settings.features, invert=self.invert)
            label, score = predict(self.model, vector)
            result.is_plot, result.score = label > 0, score
            if not result.is_plot:
                logger.info(f"{path}: not a 2-D plot (score {score:.3f})")
                return result
        else:
            result.warnings.append("no model given; classification skipped")

        binary = binarize(gray, invert=self.invert)
        seg = self.settings.segmentation
        try:
            axes = detect_axes(binary, seg)
            regions = segment_regions(binary, axes, seg.guard_band)
        except (AxesNotFound, DegenerateRegion) as e:
            logger.warning(f"{path}: {e}")
            result.warnings.append(f"{type(e).__name__}: {e}")
            return result
        result.regions = regions

        for box in (regions.x_axis_region, regions.y_axis_region):
            comps = connected_components(_crop(binary, box))
            boxes = group_text_candidates(comps, seg.gap_tolerance)
            result.text_boxes.extend(b.shifted(box.top, box.left) for b in boxes)

        points, plot_text = self._plotting_region(binary, regions, result.warnings)
        result.text_boxes.extend(plot_text)
        result.data_points = sorted(points, key=lambda p: (p.centroid[0], p.centroid[1], p.shape_id))
        logger.info(
            f"{path}: {len(result.data_points)} data points, {len(result.text_boxes)} text boxes, "
            f"{len(result.warnings)} warnings"
        )
        return result

    def _plotting_region(self, binary: BinaryImage, regions: PlotRegions, warnings: List[str]):
        seg = self.settings.segmentation
        box = regions.plotting_region
        region = _crop(binary, box)
        lines = hough_lines(
            region,
            theta_step=seg.theta_step,
            rho_step=seg.rho_step,
            top_k=seg.region_top_k,
            min_votes=seg.region_min_votes,
        )
        cleaned = remove_lines(region, lines, seg.line_thickness, seg.marker_max_area)

        points: List[DataPoint] = []
        matched: List[str] = []
        unresolved: List[ConnectedComponent] = []
        for comp in connected_components(cleaned):
            if comp.pixel_count < seg.min_blob_pixels:
                continue
            shape_id = classify_component(comp, self.templates, seg.match_threshold)
            if shape_id is None:
                unresolved.append(comp)
                continue
            matched.append(shape_id)
            row, col = comp.centroid
            points.append(DataPoint(shape_id, (row + box.top, col + box.left), "direct"))

        text = group_text_candidates(unresolved, seg.gap_tolerance)
        in_text = {label for t in text for label in t.member_components}
        candidates = anneal_candidates(self.templates, matched)
        for n, comp in enumerate(c for c in unresolved if c.label not in in_text):
            if comp.bbox.area > seg.max_blob_area:
                warnings.append(f"blob at {comp.bbox.shift(box.top, box.left).to_dict()} too large to anneal")
                continue
            try:
                points.extend(self._anneal_blob(comp, candidates, n, box, warnings))
            except AnnealError as e:
                warnings.append(f"anneal failed for blob {comp.label}: {e}")
        return points, [t.shifted(box.top, box.left) for t in text]

    def _anneal_blob(self, comp: ConnectedComponent, candidates: Sequence[ShapeTemplate], n: int, box, warnings):
        largest = max(max(t.height, t.width) for t in candidates)
        margin = 2 + max(0, largest - min(comp.bbox.height, comp.bbox.width))
        target = BinaryImage(np.pad(comp.mask.data, margin))
        smallest = min(t.area for t in candidates)
        per_shape = max(self.settings.anneal.initial_candidates_per_shape, math.ceil(comp.pixel_count / smallest) + 1)
        config = replace(
            self.settings.anneal,
            seed=self.settings.anneal.seed + n,
            initial_candidates_per_shape=per_shape,
        )
        result = anneal(target, candidates, config)
        logger.debug(f"Blob {comp.label}: {len(result.placements)} placements, cost {result.final_cost}")

        index = {t.shape_id: t for t in candidates}
        top = box.top + comp.bbox.top - margin
        left = box.left + comp.bbox.left - margin
        found = []
        for p in result.placements:
            row, col = p.shifted(top, left).centroid(index[p.shape_id])
            if not box.contains(row, col):
                warnings.append(f"annealed {p.shape_id} at ({row:.1f}, {col:.1f}) falls outside the plotting region")
                continue
            found.append(DataPoint(p.shape_id, (row, col), "annealed"))
        return found
