"""Per-instance pixel statistics -> intrinsic symbolic knowledge.

Geometry is normalized by (width-1, height-1) so pixel (0, 0) maps to
(0.0, 0.0) and the far corner to (1.0, 1.0); a one-pixel-wide instance
gets x_min == x_max. Depth central tendency is the plain arithmetic mean
over the mask (median available via depth_stat="median"); spread comes
from nearest-rank percentiles. Color is the channel-wise median RGB
snapped to the nearest palette anchor.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .interchange import DepthMap, InstanceRecord, SceneInput
from .knowledge import COLOR_ANCHORS, InstanceKnowledge
from .rle import rle_decode


def nearest_rank(sorted_values: np.ndarray, pct: float) -> float:
    """Nearest-rank percentile: the ceil(pct/100 * n)-th smallest value."""
    n = sorted_values.size
    if n == 0:
        raise ValidationError("percentile of an empty sample")
    rank = max(1, int(np.ceil(pct / 100.0 * n)))
    return float(sorted_values[rank - 1])


def classify_color(rgb_pixels: np.ndarray) -> str:
    """Name the channel-wise median RGB by its nearest palette anchor.

    Squared Euclidean distance; ties resolve to the anchor listed first.
    """
    median = np.median(rgb_pixels.reshape(-1, 3).astype(np.float64), axis=0)
    best_name, best_dist = None, None
    for name, anchor in COLOR_ANCHORS:
        d = float(np.sum((median - np.asarray(anchor, dtype=np.float64)) ** 2))
        if best_dist is None or d < best_dist:
            best_name, best_dist = name, d
    return best_name


def _normalize(index: np.ndarray | float, extent: int) -> float:
    # extent is the pixel count along the axis; a 1-pixel axis maps to 0.0
    if extent <= 1:
        return 0.0
    return float(index) / float(extent - 1)


def analyze_instance(
    record: InstanceRecord,
    depth: DepthMap,
    rgb: np.ndarray | None = None,
    depth_stat: str = "mean",
) -> InstanceKnowledge:
    """Compute the intrinsic knowledge record for one instance."""
    if depth_stat not in ("mean", "median"):
        raise ValidationError(f"unknown depth_stat {depth_stat!r}")
    mask = rle_decode(record.rle)
    h, w = mask.shape
    if (depth.height, depth.width) != (h, w):
        raise ValidationError(
            f"instance {record.id}: mask {h}x{w} does not match depth "
            f"{depth.height}x{depth.width}"
        )
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        raise ValidationError(f"instance {record.id} has an empty mask")

    x_min = _normalize(cols.min(), w)
    x_max = _normalize(cols.max(), w)
    y_min = _normalize(rows.min(), h)
    y_max = _normalize(rows.max(), h)
    cx = _normalize(cols.mean(), w)
    cy = _normalize(rows.mean(), h)

    area_px = int(rows.size)
    area_frac = area_px / float(w * h)

    sample = np.sort(depth.values[mask].astype(np.float64))
    if depth_stat == "median":
        central = float(np.median(sample))
    else:
        central = float(sample.mean())

    color = "unknown" if rgb is None else classify_color(rgb[mask])

    return InstanceKnowledge(
        id=record.id,
        class_label=record.class_label,
        bbox=(x_min, y_min, x_max, y_max),
        centroid=(cx, cy),
        area_px=area_px,
        area_frac=area_frac,
        mean_depth=central,
        depth_p05=nearest_rank(sample, 5.0),
        depth_p95=nearest_rank(sample, 95.0),
        color_name=color,
    )


def analyze_scene(scene: SceneInput, depth_stat: str = "mean") -> list[InstanceKnowledge]:
    """Analyze every instance, ordered by id ascending.

    Output is independent of the instance order in the input document.
    """
    records = sorted(scene.instances, key=lambda r: r.id)
    return [analyze_instance(r, scene.depth, scene.rgb, depth_stat) for r in records]
