"""Inclusive pixel bounding boxes."""

from dataclasses import dataclass
from typing import Dict

import numpy as np


@dataclass(frozen=True)
class BoundingBox:
    """Rows ``top..bottom`` and columns ``left..right``, both inclusive."""

    top: int
    left: int
    bottom: int
    right: int

    @property
    def height(self) -> int:
        return max(0, self.bottom - self.top + 1)

    @property
    def width(self) -> int:
        return max(0, self.right - self.left + 1)

    @property
    def area(self) -> int:
        return self.height * self.width

    def contains(self, row: float, col: float) -> bool:
        return self.top <= row <= self.bottom and self.left <= col <= self.right

    def intersects(self, other: "BoundingBox") -> bool:
        return not (
            other.left > self.right
            or other.right < self.left
            or other.top > self.bottom
            or other.bottom < self.top
        )

    def union(self, other: "BoundingBox") -> "BoundingBox":
        return BoundingBox(
            min(self.top, other.top),
            min(self.left, other.left),
            max(self.bottom, other.bottom),
            max(self.right, other.right),
        )

    def expand(self, margin: int, height: int, width: int) -> "BoundingBox":
        """Grow by ``margin`` on every side, clipped to a ``height x width`` canvas."""
        return BoundingBox(
            max(0, self.top - margin),
            max(0, self.left - margin),
            min(height - 1, self.bottom + margin),
            min(width - 1, self.right + margin),
        )

    def shift(self, rows: int, cols: int) -> "BoundingBox":
        return BoundingBox(self.top + rows, self.left + cols, self.bottom + rows, self.right + cols)

    def crop(self, array: np.ndarray) -> np.ndarray:
        return array[self.top:self.bottom + 1, self.left:self.right + 1]

    def to_dict(self) -> Dict[str, int]:
        return {"top": self.top, "left": self.left, "bottom": self.bottom, "right": self.right}

    @classmethod
    def from_dict(cls, record: Dict) -> "BoundingBox":
        return cls(int(record["top"]), int(record["left"]), int(record["bottom"]), int(record["right"]))
