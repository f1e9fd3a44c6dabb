"""Uncompressed run-length codec for binary instance masks.

Pixels are walked in column-major order (down each column, then the next
column to the right). Counts alternate background / foreground and always
start with background, so a mask whose very first pixel is foreground
begins with a 0 count.

Canonical form, produced by rle_encode: a leading 0 only when the first
pixel is foreground, and no other zero-length runs. rle_decode accepts
non-canonical but otherwise valid runs (extra zero-length runs decode to
nothing); it never repairs structural violations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FormatError


@dataclass(frozen=True)
class RleMask:
    """Run-length encoded mask. size is (height, width)."""

    size: tuple[int, int]
    counts: tuple[int, ...]


def rle_decode(rle: RleMask) -> np.ndarray:
    """Expand runs into a bool grid of shape (height, width).

    Bit (r, c) is foreground iff flat position c*height + r falls in an
    odd-indexed run. Raises FormatError when counts are negative or do
    not sum to height*width.
    """
    h, w = rle.size
    if h < 1 or w < 1:
        raise FormatError(f"mask size {h}x{w} must be positive")
    counts = np.asarray(rle.counts, dtype=np.int64)
    if counts.size and counts.min() < 0:
        raise FormatError("negative run length")
    total = int(counts.sum())
    if total != h * w:
        raise FormatError(f"run lengths sum to {total}, expected {h * w} for a {h}x{w} grid")
    values = np.arange(counts.size, dtype=np.int64) % 2 == 1
    flat = np.repeat(values, counts)
    return flat.reshape((h, w), order="F")


def rle_encode(grid: np.ndarray) -> RleMask:
    """Encode a bool grid (height, width) into canonical runs."""
    if grid.ndim != 2 or grid.size == 0:
        raise FormatError("grid must be a non-empty 2-d array")
    flat = np.asarray(grid, dtype=bool).ravel(order="F")
    # run boundaries: indices where the value changes, plus both ends
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], change, [flat.size]))
    counts = np.diff(bounds)
    if flat[0]:
        counts = np.concatenate(([0], counts))
    h, w = grid.shape
    return RleMask(size=(int(h), int(w)), counts=tuple(int(c) for c in counts))


def foreground_count(rle: RleMask) -> int:
    """Total foreground pixels: the sum of odd-indexed runs."""
    return int(sum(rle.counts[1::2]))
