"""
Feature-vector assembly for the 2-D plot classifier.

The layout is fixed: ``[IS | CA | CT]``. A family missing from the mask is
zero-filled so ablation runs share one coordinate system.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, Optional, Sequence, Tuple

import numpy as np

from errors import EmptyFeatureSet, FeatureError
from features.caption import DEFAULT_LEXICON, caption_features
from features.hough import axes_features, hough_lines
from features.wavelet import SUBBANDS, block_wavelet_features
from raster.images import GrayImage, binarize

logger = logging.getLogger(__name__)

FAMILIES = ("IS", "CA", "CT")
CA_DIM = 3


@dataclass(frozen=True)
class FeatureConfig:
    """Parameters of all three feature families."""

    block_size: int = 8
    bins: int = 16
    theta_step: float = 1.0
    rho_step: float = 1.0
    top_k: int = 8
    min_votes: int = 30
    lexicon: Tuple[str, ...] = DEFAULT_LEXICON

    def __post_init__(self):
        if self.block_size < 2 or self.block_size % 2:
            raise FeatureError(f"block_size must be even and >= 2, got {self.block_size}")
        if self.bins < 1:
            raise FeatureError(f"bins must be >= 1, got {self.bins}")
        if self.min_votes < 1:
            raise FeatureError(f"min_votes must be >= 1, got {self.min_votes}")
        object.__setattr__(self, "lexicon", tuple(w.lower() for w in self.lexicon))

    @property
    def is_dim(self) -> int:
        return len(SUBBANDS) * self.bins

    @property
    def layout(self) -> Tuple[int, int, int]:
        return (self.is_dim, CA_DIM, len(self.lexicon))


def parse_families(spec: Iterable[str]) -> FrozenSet[str]:
    """Normalise family names such as ``["is", "CT"]``; rejects unknown names."""
    mask = frozenset(name.strip().upper() for name in spec if name.strip())
    unknown = mask - set(FAMILIES)
    if unknown:
        raise FeatureError(f"unknown feature families: {sorted(unknown)}")
    return mask


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """
    Classifier input made of the IS, CA and CT families.

    Attributes
    ----------
    is_features : numpy.ndarray
        Block-wavelet histogram frequencies.
    ca_features : numpy.ndarray
        Line strengths and mutual angle.
    ct_features : numpy.ndarray
        Keyword presence booleans.
    mask : frozenset of str
        Families that are populated.
    """

    is_features: np.ndarray
    ca_features: np.ndarray
    ct_features: np.ndarray
    mask: FrozenSet[str] = field(default_factory=lambda: frozenset(FAMILIES))

    @property
    def layout(self) -> Tuple[int, int, int]:
        return (len(self.is_features), len(self.ca_features), len(self.ct_features))

    @property
    def values(self) -> np.ndarray:
        return np.concatenate([
            np.asarray(self.is_features, dtype=np.float64),
            np.asarray(self.ca_features, dtype=np.float64),
            np.asarray(self.ct_features, dtype=np.float64),
        ])

    def __len__(self) -> int:
        return sum(self.layout)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return self.mask == other.mask and self.layout == other.layout and np.array_equal(self.values, other.values)

    def with_mask(self, mask: Iterable[str]) -> "FeatureVector":
        """Zero every family outside ``mask``."""
        keep = frozenset(mask) & self.mask
        if not keep:
            raise EmptyFeatureSet("mask leaves no feature family")
        return FeatureVector(
            is_features=self.is_features if "IS" in keep else np.zeros_like(self.is_features),
            ca_features=self.ca_features if "CA" in keep else np.zeros_like(self.ca_features),
            ct_features=self.ct_features if "CT" in keep else np.zeros_like(self.ct_features),
            mask=keep,
        )

    @classmethod
    def from_flat(
        cls,
        values: Sequence[float],
        layout: Tuple[int, int, int],
        mask: Optional[Iterable[str]] = None,
    ) -> "FeatureVector":
        """Split a flat vector (e.g. a JSON-lines record) according to ``layout``."""
        values = np.asarray(values, dtype=np.float64)
        is_dim, ca_dim, ct_dim = layout
        if values.size != is_dim + ca_dim + ct_dim:
            raise FeatureError(f"vector of length {values.size} does not fit layout {tuple(layout)}")
        return cls(
            is_features=values[:is_dim],
            ca_features=values[is_dim:is_dim + ca_dim],
            ct_features=values[is_dim + ca_dim:] != 0,
            mask=frozenset(mask) if mask is not None else frozenset(FAMILIES),
        )


def assemble_feature_vector(
    is_features: Optional[Sequence[float]] = None,
    ca_features: Optional[Sequence[float]] = None,
    ct_features: Optional[Sequence[bool]] = None,
    is_dim: int = 48,
    ct_dim: int = len(DEFAULT_LEXICON),
) -> FeatureVector:
    """
    Concatenate the available families into the fixed ``[IS | CA | CT]`` layout.

    Raises
    ------
    EmptyFeatureSet
        No family was supplied.
    FeatureError
        A supplied family has the wrong length.
    """
    parts = {"IS": is_features, "CA": ca_features, "CT": ct_features}
    dims = {"IS": is_dim, "CA": CA_DIM, "CT": ct_dim}
    mask = frozenset(name for name, part in parts.items() if part is not None)
    if not mask:
        raise EmptyFeatureSet("at least one feature family is required")

    filled = {}
    for name, part in parts.items():
        if part is None:
            filled[name] = np.zeros(dims[name], dtype=bool if name == "CT" else np.float64)
            continue
        array = np.asarray(part, dtype=bool if name == "CT" else np.float64)
        if array.shape != (dims[name],):
            raise FeatureError(f"{name} family has shape {array.shape}, expected ({dims[name]},)")
        filled[name] = array

    return FeatureVector(filled["IS"], filled["CA"], filled["CT"], mask)


def extract_image_features(
    gray: GrayImage,
    caption: Optional[str] = None,
    config: FeatureConfig = FeatureConfig(),
    families: Iterable[str] = FAMILIES,
    invert: bool = False,
) -> FeatureVector:
    """
    Run IS, CA and CT extraction for one figure.

    A ``None`` caption leaves CT out of the mask (zero-filled).
    """
    wanted = frozenset(families)
    is_part = ca_part = ct_part = None
    if "IS" in wanted:
        is_part = block_wavelet_features(gray, config.block_size, config.bins)
    if "CA" in wanted:
        lines = hough_lines(
            binarize(gray, invert=invert),
            theta_step=config.theta_step,
            rho_step=config.rho_step,
            top_k=config.top_k,
            min_votes=config.min_votes,
        )
        ca_part = axes_features(lines, math.hypot(gray.width, gray.height))
    if "CT" in wanted and caption is not None:
        ct_part = caption_features(caption, config.lexicon)

    return assemble_feature_vector(
        is_part, ca_part, ct_part, is_dim=config.is_dim, ct_dim=len(config.lexicon)
    )
