"""
Coordinate-axes (CA) features: straight-line Hough transform and axis statistics.

Lines are parameterised as ``rho = col*cos(theta) - row*sin(theta)``, i.e. with
the y axis pointing up, so a horizontal line has orientation 0 degrees and the
image's main diagonal (top-left to bottom-right) reads 135 degrees.
"""

import logging
import math
from dataclasses import dataclass, asdict
from typing import Dict, List, Sequence

import numpy as np
from scipy import ndimage

from errors import FeatureError
from raster.images import BinaryImage

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LineSegment:
    """
    One Hough accumulator peak.

    Attributes
    ----------
    rho : float
        Signed distance of the line from the origin along its normal (pixels).
    theta_deg : float
        Normal angle in [0, 180).
    votes : int
        Foreground pixels supporting the line.
    """

    rho: float
    theta_deg: float
    votes: int

    @property
    def orientation_deg(self) -> float:
        """Direction of the line itself, in [0, 180)."""
        return (self.theta_deg + 90.0) % 180.0

    def row_at(self, col: float) -> float:
        """Row where the line crosses ``col`` (near-horizontal lines)."""
        theta = math.radians(self.theta_deg)
        return (col * math.cos(theta) - self.rho) / math.sin(theta)

    def col_at(self, row: float) -> float:
        """Column where the line crosses ``row`` (near-vertical lines)."""
        theta = math.radians(self.theta_deg)
        return (self.rho + row * math.sin(theta)) / math.cos(theta)

    def distance(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        theta = math.radians(self.theta_deg)
        return np.abs(cols * math.cos(theta) - rows * math.sin(theta) - self.rho)

    def to_dict(self) -> Dict:
        record = asdict(self)
        record["orientation_deg"] = self.orientation_deg
        return record

    @classmethod
    def from_dict(cls, record: Dict) -> "LineSegment":
        return cls(rho=float(record["rho"]), theta_deg=float(record["theta_deg"]), votes=int(record["votes"]))


def mutual_angle(a: float, b: float) -> float:
    """Smallest angle between two orientations, in [0, 90]."""
    diff = abs(a - b) % 180.0
    return min(diff, 180.0 - diff)


def hough_accumulator(img: BinaryImage, theta_step: float = 1.0, rho_step: float = 1.0):
    """
    Vote every foreground pixel into a (rho, theta) accumulator.

    Returns
    -------
    tuple
        ``(accumulator, thetas_deg, rho_offset)`` where accumulator row ``r``
        corresponds to ``rho = (r - rho_offset) * rho_step``.
    """
    n_theta = 180.0 / theta_step
    if theta_step <= 0 or abs(n_theta - round(n_theta)) > 1e-9:
        raise FeatureError(f"theta_step {theta_step} must divide 180")
    if rho_step <= 0:
        raise FeatureError(f"rho_step must be positive, got {rho_step}")

    thetas_deg = np.arange(int(round(n_theta))) * theta_step
    diag = math.hypot(img.height, img.width)
    rho_offset = int(math.ceil(diag / rho_step))
    accumulator = np.zeros((2 * rho_offset + 1, len(thetas_deg)), dtype=np.int64)

    rows, cols = np.nonzero(img.data)
    if rows.size == 0:
        return accumulator, thetas_deg, rho_offset

    thetas = np.deg2rad(thetas_deg)
    rho = cols[:, None] * np.cos(thetas)[None, :] - rows[:, None] * np.sin(thetas)[None, :]
    rho_idx = np.rint(rho / rho_step).astype(np.int64) + rho_offset
    theta_idx = np.broadcast_to(np.arange(len(thetas_deg)), rho_idx.shape)
    np.add.at(accumulator, (rho_idx.ravel(), theta_idx.ravel()), 1)
    return accumulator, thetas_deg, rho_offset


def hough_lines(
    img: BinaryImage,
    theta_step: float = 1.0,
    rho_step: float = 1.0,
    top_k: int = 8,
    min_votes: int = 30,
) -> List[LineSegment]:
    """
    Detect the strongest straight lines of a binary image.

    Peaks are accumulator cells that equal the maximum of their 3x3
    neighbourhood and hold at least ``min_votes``; plateaus are thinned so no
    two returned cells are adjacent. Results are sorted by votes descending,
    then smaller theta, then smaller rho.

    Parameters
    ----------
    img : BinaryImage
    theta_step : float, optional
        Angular resolution in degrees; must divide 180.
    rho_step : float, optional
        Distance resolution in pixels.
    top_k : int, optional
        Maximum number of lines returned.
    min_votes : int, optional
        Minimum supporting pixels per line (>= 1).

    Returns
    -------
    list of LineSegment
    """
    if min_votes < 1:
        raise FeatureError(f"min_votes must be >= 1, got {min_votes}")
    accumulator, thetas_deg, rho_offset = hough_accumulator(img, theta_step, rho_step)
    if top_k <= 0 or not accumulator.any():
        return []

    local_max = ndimage.maximum_filter(accumulator, size=3, mode="constant", cval=0)
    peaks = (accumulator >= min_votes) & (accumulator == local_max)
    rho_idx, theta_idx = np.nonzero(peaks)
    votes = accumulator[rho_idx, theta_idx]
    order = np.lexsort((rho_idx, theta_idx, -votes))

    chosen = []
    for k in order:
        r, t = int(rho_idx[k]), int(theta_idx[k])
        if any(abs(r - cr) <= 1 and abs(t - ct) <= 1 for cr, ct in chosen):
            continue
        chosen.append((r, t))
        if len(chosen) == top_k:
            break

    lines = [
        LineSegment(
            rho=float((r - rho_offset) * rho_step),
            theta_deg=float(thetas_deg[t]),
            votes=int(accumulator[r, t]),
        )
        for r, t in chosen
    ]
    logger.debug(f"Hough found {len(lines)} lines (min_votes={min_votes})")
    return lines


def axes_features(lines: Sequence[LineSegment], img_diag: float) -> np.ndarray:
    """
    CA features from the two strongest lines.

    Returns ``[v1/diag, v2/diag, mutual_angle/90]``; missing lines contribute 0
    and the angle term needs both lines.
    """
    features = np.zeros(3)
    if img_diag <= 0:
        return features
    if len(lines) >= 1:
        features[0] = lines[0].votes / img_diag
    if len(lines) >= 2:
        features[1] = lines[1].votes / img_diag
        features[2] = mutual_angle(lines[0].orientation_deg, lines[1].orientation_deg) / 90.0
    return features
