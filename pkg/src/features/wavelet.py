"""Image-segment (IS) features: pooled Haar detail histograms over fixed blocks."""

import logging
from typing import Dict

import numpy as np
import pywt

from errors import BlockTooLarge, FeatureError
from raster.images import GrayImage

logger = logging.getLogger(__name__)

SUBBANDS = ("LH", "HL", "HH")
COEFFICIENT_RANGE = (-255.0, 255.0)


def split_blocks(data: np.ndarray, block_size: int) -> np.ndarray:
    """
    Tile ``data`` into ``(n_blocks, block_size, block_size)``.

    Edges are padded by replication up to a multiple of ``block_size``.
    """
    height, width = data.shape
    pad_rows = (-height) % block_size
    pad_cols = (-width) % block_size
    padded = np.pad(data, ((0, pad_rows), (0, pad_cols)), mode="edge")
    rows = padded.shape[0] // block_size
    cols = padded.shape[1] // block_size
    return (
        padded.reshape(rows, block_size, cols, block_size)
        .swapaxes(1, 2)
        .reshape(rows * cols, block_size, block_size)
    )


def haar_subbands(blocks: np.ndarray) -> Dict[str, np.ndarray]:
    """
    One-level 2-D Haar transform of every block.

    With PyWavelets' orthonormal Haar filters the 2-D detail of a 2x2 cell
    ``[[a, b], [c, d]]`` is ``LH = (a + b - c - d)/2``, ``HL = (a - b + c - d)/2``
    and ``HH = (a - b - c + d)/2``.
    """
    blocks = np.asarray(blocks, dtype=np.float64)
    _, (lh, hl, hh) = pywt.dwt2(blocks, "haar", axes=(-2, -1))
    return {"LH": lh, "HL": hl, "HH": hh}


def block_wavelet_features(img: GrayImage, block_size: int = 8, bins: int = 16) -> np.ndarray:
    """
    Compute the IS feature family.

    Each block gets a one-level Haar transform; detail coefficients of all
    blocks are pooled per subband into a ``bins``-bin histogram over
    [-255, 255] normalised to sum 1. The three histograms are concatenated in
    LH, HL, HH order.

    Parameters
    ----------
    img : GrayImage
    block_size : int, optional
        Even block edge length of at least 2 (default 8).
    bins : int, optional
        Histogram bins per subband (default 16).

    Returns
    -------
    numpy.ndarray
        Vector of length ``3 * bins`` summing to 3.
    """
    if block_size < 2 or block_size % 2:
        raise FeatureError(f"block_size must be even and >= 2, got {block_size}")
    if block_size > img.width or block_size > img.height:
        raise BlockTooLarge(
            f"block_size {block_size} exceeds image size {img.width}x{img.height}"
        )

    blocks = split_blocks(img.data, block_size)
    subbands = haar_subbands(blocks)

    histograms = []
    for name in SUBBANDS:
        coeffs = np.clip(subbands[name].ravel(), *COEFFICIENT_RANGE)
        counts, _ = np.histogram(coeffs, bins=bins, range=COEFFICIENT_RANGE)
        histograms.append(counts / coeffs.size)

    logger.debug(f"IS features from {len(blocks)} blocks of {block_size}px")
    return np.concatenate(histograms)
