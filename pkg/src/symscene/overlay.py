"""Render a scene graph onto the source image for visual inspection.

Everything is drawn with integer pixel arithmetic (no font or drawing
dependencies), so output bytes are identical across platforms: box
outlines in a cycling bright palette, instance ids as 5x7 bitmap digits
at each box corner, and one dark line with arrow ticks between the
centroids of every related pair.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError
from .knowledge import SceneGraph

_OUTLINE_COLORS = (
    (255, 60, 60),
    (60, 220, 60),
    (70, 110, 255),
    (255, 210, 40),
    (230, 80, 230),
    (40, 220, 220),
)
_LINE_COLOR = (30, 30, 30)
_TICK_LENGTH = 6
_TICK_ANGLE = 2.618  # 150 degrees off the line direction

_DIGITS = {
    "0": ("01110", "10001", "10011", "10101", "11001", "10001", "01110"),
    "1": ("00100", "01100", "00100", "00100", "00100", "00100", "01110"),
    "2": ("01110", "10001", "00001", "00010", "00100", "01000", "11111"),
    "3": ("11111", "00010", "00100", "00010", "00001", "10001", "01110"),
    "4": ("00010", "00110", "01010", "10010", "11111", "00010", "00010"),
    "5": ("11111", "10000", "11110", "00001", "00001", "10001", "01110"),
    "6": ("00110", "01000", "10000", "11110", "10001", "10001", "01110"),
    "7": ("11111", "00001", "00010", "00100", "01000", "01000", "01000"),
    "8": ("01110", "10001", "10001", "01110", "10001", "10001", "01110"),
    "9": ("01110", "10001", "10001", "01111", "00001", "00010", "01100"),
}


def _plot(img: np.ndarray, row: int, col: int, color) -> None:
    if 0 <= row < img.shape[0] and 0 <= col < img.shape[1]:
        img[row, col] = color


def _line(img: np.ndarray, r0: int, c0: int, r1: int, c1: int, color) -> None:
    # Bresenham
    dr = abs(r1 - r0)
    dc = abs(c1 - c0)
    sr = 1 if r0 < r1 else -1
    sc = 1 if c0 < c1 else -1
    err = dc - dr
    r, c = r0, c0
    while True:
        _plot(img, r, c, color)
        if r == r1 and c == c1:
            return
        e2 = 2 * err
        if e2 > -dr:
            err -= dr
            c += sc
        if e2 < dc:
            err += dc
            r += sr


def _rect_outline(img: np.ndarray, r0: int, c0: int, r1: int, c1: int, color) -> None:
    for c in range(c0, c1 + 1):
        _plot(img, r0, c, color)
        _plot(img, r1, c, color)
    for r in range(r0, r1 + 1):
        _plot(img, r, c0, color)
        _plot(img, r, c1, color)


def _draw_digits(img: np.ndarray, text: str, row: int, col: int, color) -> None:
    x = col
    for ch in text:
        glyph = _DIGITS[ch]
        for gr, bits in enumerate(glyph):
            for gc, bit in enumerate(bits):
                if bit == "1":
                    _plot(img, row + gr, x + gc, color)
        x += 6  # 5 wide plus 1 gap


def _arrow_ticks(img: np.ndarray, r: int, c: int, direction: tuple[float, float], color) -> None:
    """Two short ticks at (r, c) splayed against the incoming direction."""
    dy, dx = direction
    norm = math.hypot(dx, dy)
    if norm == 0.0:
        return
    dx, dy = dx / norm, dy / norm
    for angle in (_TICK_ANGLE, -_TICK_ANGLE):
        tx = dx * math.cos(angle) - dy * math.sin(angle)
        ty = dx * math.sin(angle) + dy * math.cos(angle)
        _line(
            img,
            r,
            c,
            r + round(ty * _TICK_LENGTH),
            c + round(tx * _TICK_LENGTH),
            color,
        )


def draw_overlay(rgb: np.ndarray, graph: SceneGraph) -> np.ndarray:
    """A copy of the image with boxes, ids, and relation lines drawn in."""
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValidationError("overlay needs a (height, width, 3) image")
    img = np.ascontiguousarray(rgb, dtype=np.uint8).copy()
    height, width = img.shape[:2]

    def to_px(x: float, extent: int) -> int:
        return int(round(x * (extent - 1)))

    centroids = {
        k.id: (to_px(k.centroid[1], height), to_px(k.centroid[0], width))
        for k in graph.instances
    }

    related = sorted(
        {tuple(sorted((e.subject_id, e.object_id))) for e in graph.relations}
    )
    for a_id, b_id in related:
        (r0, c0), (r1, c1) = centroids[a_id], centroids[b_id]
        _line(img, r0, c0, r1, c1, _LINE_COLOR)
        _arrow_ticks(img, r1, c1, (r1 - r0, c1 - c0), _LINE_COLOR)
        _arrow_ticks(img, r0, c0, (r0 - r1, c0 - c1), _LINE_COLOR)

    for index, k in enumerate(graph.instances):
        color = _OUTLINE_COLORS[index % len(_OUTLINE_COLORS)]
        x0, y0, x1, y1 = k.bbox
        r0, c0 = to_px(y0, height), to_px(x0, width)
        r1, c1 = to_px(y1, height), to_px(x1, width)
        _rect_outline(img, r0, c0, r1, c1, color)
        _draw_digits(img, str(k.id), r0 + 2, c0 + 2, color)
    return img
