"""Symbolic vocabulary of the engine.

Everything downstream of pixel analysis speaks these types: per-instance
knowledge records, the relation taxonomy with its converse structure and
canonical surface phrases, pairwise decision thresholds, and the scene
graph that bundles them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields

from .errors import ValidationError


class RelationKind(enum.Enum):
    """Pairwise relation taxonomy.

    The first eight are the fundamental spatial relations (two per image
    axis plus 3-d proximity); the remaining six are complex interaction
    types. Declaration order is the canonical sort order for edges.
    """

    LEFT_OF = "LEFT_OF"
    RIGHT_OF = "RIGHT_OF"
    ABOVE = "ABOVE"
    BELOW = "BELOW"
    IN_FRONT_OF = "IN_FRONT_OF"
    BEHIND = "BEHIND"
    NEAR = "NEAR"
    FAR = "FAR"
    INSIDE = "INSIDE"
    CONTAINS = "CONTAINS"
    BESIDE = "BESIDE"
    OVERLAPS = "OVERLAPS"
    OCCLUDES = "OCCLUDES"
    OCCLUDED_BY = "OCCLUDED_BY"


FUNDAMENTAL_KINDS = tuple(list(RelationKind)[:8])
COMPLEX_KINDS = tuple(list(RelationKind)[8:])

KIND_ORDER = {kind: i for i, kind in enumerate(RelationKind)}

# Converse of each kind: if (a, kind, b) holds then (b, converse, a) holds.
CONVERSE = {
    RelationKind.LEFT_OF: RelationKind.RIGHT_OF,
    RelationKind.RIGHT_OF: RelationKind.LEFT_OF,
    RelationKind.ABOVE: RelationKind.BELOW,
    RelationKind.BELOW: RelationKind.ABOVE,
    RelationKind.IN_FRONT_OF: RelationKind.BEHIND,
    RelationKind.BEHIND: RelationKind.IN_FRONT_OF,
    RelationKind.NEAR: RelationKind.NEAR,
    RelationKind.FAR: RelationKind.FAR,
    RelationKind.INSIDE: RelationKind.CONTAINS,
    RelationKind.CONTAINS: RelationKind.INSIDE,
    RelationKind.BESIDE: RelationKind.BESIDE,
    RelationKind.OVERLAPS: RelationKind.OVERLAPS,
    RelationKind.OCCLUDES: RelationKind.OCCLUDED_BY,
    RelationKind.OCCLUDED_BY: RelationKind.OCCLUDES,
}

# Canonical surface text, read as "#subject <phrase> #object".
PHRASES = {
    RelationKind.LEFT_OF: "to the left of",
    RelationKind.RIGHT_OF: "to the right of",
    RelationKind.ABOVE: "at the top of",
    RelationKind.BELOW: "at the bottom of",
    RelationKind.IN_FRONT_OF: "in front of",
    RelationKind.BEHIND: "behind",
    RelationKind.NEAR: "near",
    RelationKind.FAR: "far from",
    RelationKind.INSIDE: "inside",
    RelationKind.CONTAINS: "contains",
    RelationKind.BESIDE: "beside",
    RelationKind.OVERLAPS: "overlaps",
    RelationKind.OCCLUDES: "occludes",
    RelationKind.OCCLUDED_BY: "occluded by",
}

# Nearest-anchor palette for color naming. Order matters: squared-distance
# ties resolve to the earlier entry.
COLOR_ANCHORS: tuple[tuple[str, tuple[int, int, int]], ...] = (
    ("white", (255, 255, 255)),
    ("black", (0, 0, 0)),
    ("gray", (128, 128, 128)),
    ("red", (220, 40, 40)),
    ("orange", (245, 140, 30)),
    ("yellow", (245, 220, 40)),
    ("green", (60, 160, 60)),
    ("blue", (50, 90, 220)),
    ("purple", (130, 60, 180)),
    ("pink", (240, 150, 190)),
    ("brown", (140, 90, 50)),
)

COLOR_NAMES = tuple(name for name, _ in COLOR_ANCHORS)


@dataclass(frozen=True)
class Thresholds:
    """Decision thresholds for pair classification.

    All values are in normalized units. near_dist/far_dist apply to the
    3-d distance of (cx, cy, depth normalized by the scene range);
    tau_z_frac applies to depth differences as a fraction of that range.
    """

    tau_xy: float = 0.05
    tau_z_frac: float = 0.10
    inside_containment: float = 0.95
    beside_gap: float = 0.10
    near_dist: float = 0.15
    far_dist: float = 0.50
    occlusion_overlap: float = 0.01

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not v > 0:
                raise ValidationError(f"threshold {f.name} must be positive, got {v!r}")
        if not self.near_dist < self.far_dist:
            raise ValidationError(
                f"near_dist ({self.near_dist}) must be below far_dist ({self.far_dist})"
            )
        if not (0.5 < self.inside_containment <= 1.0):
            raise ValidationError(
                f"inside_containment must lie in (0.5, 1], got {self.inside_containment}"
            )


THRESHOLD_NAMES = tuple(f.name for f in fields(Thresholds))


@dataclass(frozen=True)
class InstanceKnowledge:
    """Intrinsic symbolic facts about one segmented instance.

    bbox and centroid are normalized by (width-1, height-1) so corner
    pixels map to exactly 0 and 1; a single-pixel extent collapses to
    x_min == x_max. Depth percentiles use the nearest-rank method.
    """

    id: int
    class_label: str
    bbox: tuple[float, float, float, float]
    centroid: tuple[float, float]
    area_px: int
    area_frac: float
    mean_depth: float
    depth_p05: float
    depth_p95: float
    color_name: str


@dataclass(frozen=True)
class RelationEdge:
    """One directed symbolic relation: subject <kind> object."""

    subject_id: int
    object_id: int
    kind: RelationKind
    strength: float
    phrase: str


@dataclass
class SceneGraph:
    """Instances plus the relation edges among them."""

    instances: list[InstanceKnowledge]
    relations: list[RelationEdge]
    meta: dict = field(default_factory=dict)
