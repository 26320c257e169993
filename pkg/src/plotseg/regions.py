"""
Axis detection and the three-region split of a 2-D plot.

The X-axis region lies below the horizontal axis, the Y-axis region left of
the vertical axis, and the plotting region above/right of both, separated
from the axis lines by a guard band.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Tuple

from errors import AxesNotFound, ConfigError, DegenerateRegion
from features.hough import LineSegment, hough_lines, mutual_angle
from plotseg.geometry import BoundingBox
from raster.images import BinaryImage

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SegmentConfig:
    """Tunables for segmentation, line removal and marker matching."""

    axis_tolerance_deg: float = 10.0
    min_axis_angle: float = 80.0
    max_axis_angle: float = 100.0
    axis_min_votes: int = 30
    axis_top_k: int = 16
    theta_step: float = 1.0
    rho_step: float = 1.0
    guard_band: int = 2
    line_thickness: int = 1
    marker_max_area: int = 400
    match_threshold: float = 0.85
    gap_tolerance: float = 0.5
    region_min_votes: int = 15
    region_top_k: int = 16
    min_blob_pixels: int = 10
    max_blob_area: int = 2500

    def __post_init__(self):
        if not 0 <= self.axis_tolerance_deg < 45:
            raise ConfigError(f"axis_tolerance_deg must lie in [0, 45), got {self.axis_tolerance_deg}")
        if not 0 < self.match_threshold <= 1:
            raise ConfigError(f"match_threshold must lie in (0, 1], got {self.match_threshold}")
        if self.guard_band < 0 or self.line_thickness < 0:
            raise ConfigError("guard_band and line_thickness must be non-negative")
        if self.gap_tolerance < 0:
            raise ConfigError(f"gap_tolerance must be non-negative, got {self.gap_tolerance}")


@dataclass(frozen=True)
class PlotRegions:
    x_axis_region: BoundingBox
    y_axis_region: BoundingBox
    plotting_region: BoundingBox
    x_axis_line: LineSegment
    y_axis_line: LineSegment

    def boxes(self) -> Tuple[BoundingBox, BoundingBox, BoundingBox]:
        return (self.x_axis_region, self.y_axis_region, self.plotting_region)

    def to_dict(self) -> Dict:
        return {
            "x_axis_region": self.x_axis_region.to_dict(),
            "y_axis_region": self.y_axis_region.to_dict(),
            "plotting_region": self.plotting_region.to_dict(),
            "x_axis_line": self.x_axis_line.to_dict(),
            "y_axis_line": self.y_axis_line.to_dict(),
        }

    @classmethod
    def from_dict(cls, record: Dict) -> "PlotRegions":
        return cls(
            x_axis_region=BoundingBox.from_dict(record["x_axis_region"]),
            y_axis_region=BoundingBox.from_dict(record["y_axis_region"]),
            plotting_region=BoundingBox.from_dict(record["plotting_region"]),
            x_axis_line=LineSegment.from_dict(record["x_axis_line"]),
            y_axis_line=LineSegment.from_dict(record["y_axis_line"]),
        )


def is_horizontal(line: LineSegment, tolerance: float) -> bool:
    return mutual_angle(line.orientation_deg, 0.0) <= tolerance


def is_vertical(line: LineSegment, tolerance: float) -> bool:
    return mutual_angle(line.orientation_deg, 90.0) <= tolerance


def detect_axes(img: BinaryImage, config: SegmentConfig = SegmentConfig()) -> Tuple[LineSegment, LineSegment]:
    """
    Pick the X and Y axes among the strongest Hough lines.

    The X axis is the highest-vote line within ``axis_tolerance_deg`` of
    horizontal, the Y axis the highest-vote line near vertical.

    Raises
    ------
    AxesNotFound
        Either family is empty or the pair is not near-orthogonal.
    """
    if img.count() == 0:
        raise AxesNotFound("image has no foreground")
    lines = hough_lines(
        img,
        theta_step=config.theta_step,
        rho_step=config.rho_step,
        top_k=config.axis_top_k,
        min_votes=config.axis_min_votes,
    )
    horizontal = [l for l in lines if is_horizontal(l, config.axis_tolerance_deg)]
    vertical = [l for l in lines if is_vertical(l, config.axis_tolerance_deg)]
    if not horizontal or not vertical:
        raise AxesNotFound(
            f"found {len(horizontal)} horizontal and {len(vertical)} vertical axis candidates"
        )
    x_axis, y_axis = horizontal[0], vertical[0]
    angle = mutual_angle(x_axis.orientation_deg, y_axis.orientation_deg)
    if not config.min_axis_angle <= angle <= config.max_axis_angle:
        raise AxesNotFound(f"axis candidates meet at {angle:.1f} degrees")
    logger.debug(f"Axes: x rho={x_axis.rho} theta={x_axis.theta_deg}, y rho={y_axis.rho} theta={y_axis.theta_deg}")
    return x_axis, y_axis


def axis_positions(img: BinaryImage, axes: Tuple[LineSegment, LineSegment]) -> Tuple[int, int]:
    """Row of the X axis at the image's centre column and column of the Y axis at its centre row."""
    x_axis, y_axis = axes
    x_row = int(round(x_axis.row_at((img.width - 1) / 2.0)))
    y_col = int(round(y_axis.col_at((img.height - 1) / 2.0)))
    return x_row, y_col


def segment_regions(
    img: BinaryImage,
    axes: Tuple[LineSegment, LineSegment],
    guard_band: int = 2,
) -> PlotRegions:
    """
    Split a plot into X-axis, Y-axis and plotting regions.

    Raises
    ------
    DegenerateRegion
        One of the regions would have zero area.
    """
    x_axis, y_axis = axes
    x_row, y_col = axis_positions(img, axes)
    height, width = img.height, img.width
    if not (0 <= x_row < height and 0 <= y_col < width):
        raise DegenerateRegion(f"axes at row {x_row}, col {y_col} fall outside the image")

    x_region = BoundingBox(x_row + 1, 0, height - 1, width - 1)
    y_region = BoundingBox(0, 0, x_row - 1, y_col - 1)
    plotting = BoundingBox(0, y_col + guard_band + 1, x_row - guard_band - 1, width - 1)

    for name, box in (("x-axis", x_region), ("y-axis", y_region), ("plotting", plotting)):
        if box.bottom < box.top or box.right < box.left:
            raise DegenerateRegion(f"{name} region is empty (axes at row {x_row}, col {y_col})")

    return PlotRegions(x_region, y_region, plotting, x_axis, y_axis)
