"""Raster drawing primitives for the synthetic generators (ink = ``True``)."""

from typing import Sequence

import numpy as np

# 3x5 digit bitmaps used as stand-in glyphs for tick labels and text rows
DIGITS = [
    ["###", "#.#", "#.#", "#.#", "###"],
    [".#.", "##.", ".#.", ".#.", "###"],
    ["###", "..#", "###", "#..", "###"],
    ["###", "..#", "###", "..#", "###"],
    ["#.#", "#.#", "###", "..#", "..#"],
    ["###", "#..", "###", "..#", "###"],
    ["###", "#..", "###", "#.#", "###"],
    ["###", "..#", ".#.", ".#.", ".#."],
    ["###", "#.#", "###", "#.#", "###"],
    ["###", "#.#", "###", "..#", "###"],
]
GLYPHS = [np.array([[c == "#" for c in row] for row in rows], dtype=bool) for rows in DIGITS]
GLYPH_HEIGHT, GLYPH_WIDTH = GLYPHS[0].shape


def draw_line(canvas: np.ndarray, r0: int, c0: int, r1: int, c1: int):
    """Draw a 1-px line between two pixel centres, clipped to the canvas."""
    n = max(abs(r1 - r0), abs(c1 - c0)) + 1
    rows = np.rint(np.linspace(r0, r1, n)).astype(int)
    cols = np.rint(np.linspace(c0, c1, n)).astype(int)
    keep = (rows >= 0) & (rows < canvas.shape[0]) & (cols >= 0) & (cols < canvas.shape[1])
    canvas[rows[keep], cols[keep]] = True


def draw_polyline(canvas: np.ndarray, points: Sequence[Sequence[int]]):
    for (r0, c0), (r1, c1) in zip(points, points[1:]):
        draw_line(canvas, r0, c0, r1, c1)


def stamp(canvas: np.ndarray, mask: np.ndarray, top: int, left: int):
    """OR ``mask`` into ``canvas`` with its top-left corner at ``(top, left)``."""
    canvas[top:top + mask.shape[0], left:left + mask.shape[1]] |= mask


def text_width(n_glyphs: int, gap: int = 2) -> int:
    return n_glyphs * GLYPH_WIDTH + max(0, n_glyphs - 1) * gap


def draw_text(canvas: np.ndarray, top: int, left: int, digits: Sequence[int], gap: int = 2) -> int:
    """Draw a row of digit glyphs; returns the column just past the last glyph."""
    col = left
    for d in digits:
        glyph = GLYPHS[d % 10]
        if top + GLYPH_HEIGHT > canvas.shape[0] or col + GLYPH_WIDTH > canvas.shape[1] or top < 0 or col < 0:
            break
        stamp(canvas, glyph, top, col)
        col += GLYPH_WIDTH + gap
    return col


def speckle(canvas: np.ndarray, fraction: float, rng: np.random.Generator, allowed: np.ndarray = None):
    """Set a ``fraction`` of the (allowed) pixels to ink at random."""
    if fraction <= 0:
        return
    candidates = np.flatnonzero(allowed if allowed is not None else np.ones(canvas.shape, dtype=bool))
    count = int(round(fraction * candidates.size))
    if count:
        chosen = rng.choice(candidates, size=count, replace=False)
        canvas.flat[chosen] = True
