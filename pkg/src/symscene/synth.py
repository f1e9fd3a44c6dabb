"""Synthetic scene generation with analytic ground truth.

Scenes are built from parametric shapes (axis-aligned rectangles and
ellipses in normalized coordinates), rasterized back to front so nearer
shapes occlude farther ones, and emitted through the same interchange
formats the engine consumes. Because every shape has a known center,
box, and uniform depth, the relations the engine should find are
computable in closed form; ``random_scene`` returns that ground truth
alongside the rendered scene.

Random layouts are drawn from a small family of archetypes (lattice
quads, hex rings, an occlusion pair with satellites, two depth-separated
clusters, and a hex plus quad combination) whose dimensions keep every
decision quantity far from its threshold. A verifier then checks, rule
by rule, that each firing relation clears its threshold by the requested
margin factor and each non-firing relation misses by a clear cushion;
layouts that land in the ambiguous band are resampled. Seeds that cannot
produce a compliant layout (too many shapes, margin factors beyond what
the unit square admits) raise GenerationError after a bounded number of
attempts rather than degrading the guarantee.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, GenerationError, ValidationError
from .interchange import (
    DepthMap,
    InstanceRecord,
    SceneInput,
    _as_int,
    _as_num,
    _as_str,
    _get,
    _parse_json,
    dumps_canonical,
)
from .knowledge import COLOR_ANCHORS, COLOR_NAMES, KIND_ORDER, RelationKind, Thresholds
from .relations import DEGENERATE_RANGE
from .rle import rle_encode

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Tiny deterministic PRNG so scenes reproduce across platforms.

    splitmix64 with the standard increment and finalizer constants
    (0x9E3779B97F4A7C15; 0xBF58476D1CE4B34B, 0x94D049BB133111EB).
    """

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4B34B) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def next_float(self) -> float:
        # top 53 bits -> [0, 1)
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.next_float()

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi]; ranges here are tiny, so the
        modulo bias is negligible."""
        return lo + self.next_u64() % (hi - lo + 1)

    def choice(self, seq):
        return seq[self.next_u64() % len(seq)]

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.next_u64() % (i + 1)
            items[i], items[j] = items[j], items[i]


RECT = "rect"
ELLIPSE = "ellipse"

_COLOR_RGB = dict(COLOR_ANCHORS)
_BACKGROUND_RGB = (210, 210, 210)
_CLASSES = ("box", "ball", "block", "toy")


@dataclass(frozen=True)
class ShapeSpec:
    """One parametric shape in normalized image coordinates.

    half_extents are the box half sizes; an ellipse inscribes its box.
    z_order orders painting: larger paints later, i.e. closer to the
    camera, and must agree with depth_value (smaller depth = closer).
    """

    kind: str
    class_label: str
    color: str
    center: tuple[float, float]
    half_extents: tuple[float, float]
    depth_value: float
    z_order: int


@dataclass
class GroundTruth:
    """What the engine should report for a generated scene.

    specs are indexed by instance id. relations hold (subject_id,
    object_id, kind) triples in canonical order; census maps
    (class, color) to the number of such shapes.
    """

    width: int
    height: int
    specs: list[ShapeSpec]
    relations: list[tuple[int, int, RelationKind]]
    census: dict[tuple[str, str], int]


# ---------------------------------------------------------------------------
# rasterization


def _axis_coords(extent: int) -> np.ndarray:
    if extent == 1:
        return np.zeros(1)
    return np.arange(extent) / (extent - 1)


def _full_mask(spec: ShapeSpec, grid_x: np.ndarray, grid_y: np.ndarray) -> np.ndarray:
    cx, cy = spec.center
    ex, ey = spec.half_extents
    if spec.kind == RECT:
        return (np.abs(grid_x - cx) <= ex) & (np.abs(grid_y - cy) <= ey)
    nx = (grid_x - cx) / ex
    ny = (grid_y - cy) / ey
    return nx * nx + ny * ny <= 1.0


def _check_specs(specs: list[ShapeSpec]) -> None:
    for i, s in enumerate(specs):
        if s.kind not in (RECT, ELLIPSE):
            raise ValidationError(f"shape {i} has unknown kind {s.kind!r}")
        if s.color not in _COLOR_RGB:
            raise ValidationError(f"shape {i} has unknown color {s.color!r}")
        if not (s.half_extents[0] > 0 and s.half_extents[1] > 0):
            raise ValidationError(f"shape {i} has non-positive extents")
        if not math.isfinite(s.depth_value):
            raise ValidationError(f"shape {i} has non-finite depth")


def render_scene(
    specs: list[ShapeSpec],
    width: int = 256,
    height: int = 256,
    source_prompt: str | None = None,
) -> SceneInput:
    """Rasterize shapes into a complete scene: masks, depth, and color.

    Painting runs back to front, so each instance mask holds only the
    visible pixels; masks are therefore pairwise disjoint. A shape left
    without any visible pixel, or two shapes overlapping at the same
    z order (paint order would be arbitrary), is a GenerationError.
    """
    if not specs:
        raise ValidationError("cannot render an empty shape list")
    if width < 2 or height < 2:
        raise ValidationError(f"render size {width}x{height} is too small")
    _check_specs(specs)

    grid_x, grid_y = np.meshgrid(_axis_coords(width), _axis_coords(height))
    full = [_full_mask(s, grid_x, grid_y) for s in specs]
    for i, m in enumerate(full):
        if not m.any():
            raise GenerationError(f"shape {i} rasterizes to no pixels")
    for i in range(len(specs)):
        for j in range(i + 1, len(specs)):
            if specs[i].z_order == specs[j].z_order and (full[i] & full[j]).any():
                raise GenerationError(
                    f"shapes {i} and {j} overlap at the same z order"
                )

    canvas = np.full((height, width), -1, dtype=np.int32)
    for idx in sorted(range(len(specs)), key=lambda i: (specs[i].z_order, i)):
        canvas[full[idx]] = idx

    background = max(s.depth_value for s in specs) + 1.0
    depth = np.full((height, width), background, dtype=np.float32)
    rgb = np.full((height, width, 3), _BACKGROUND_RGB, dtype=np.uint8)
    records = []
    for idx, s in enumerate(specs):
        visible = canvas == idx
        if not visible.any():
            raise GenerationError(f"shape {idx} is fully occluded")
        depth[visible] = np.float32(s.depth_value)
        rgb[visible] = _COLOR_RGB[s.color]
        records.append(
            InstanceRecord(
                id=idx, class_label=s.class_label, score=None, rle=rle_encode(visible)
            )
        )
    return SceneInput(
        width=width,
        height=height,
        instances=records,
        depth=DepthMap(width=width, height=height, values=depth),
        rgb=rgb,
        source_prompt=source_prompt,
    )


# ---------------------------------------------------------------------------
# analytic ground truth

# Rendered shapes never share visible pixels (painting partitions the
# canvas), so overlap, containment, and nearness of masks are off the
# table analytically; what remains mirrors the pairwise rules on exact
# centers, boxes, and depths.


def _spec_bbox(s: ShapeSpec) -> tuple[float, float, float, float]:
    return (
        s.center[0] - s.half_extents[0],
        s.center[1] - s.half_extents[1],
        s.center[0] + s.half_extents[0],
        s.center[1] + s.half_extents[1],
    )


def _box_gap_vals(a, b) -> float:
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    return max(max(ax0, bx0) - min(ax1, bx1), max(ay0, by0) - min(ay1, by1))


def _box_iou_vals(a, b) -> float:
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union if union > 0.0 else 0.0


@dataclass(frozen=True)
class _PairGeometry:
    dx: float
    dy: float
    dz: float
    d3: float
    gap: float
    iou: float
    degenerate: bool


def _pair_geometry(specs: list[ShapeSpec], i: int, j: int, span: float) -> _PairGeometry:
    a, b = specs[i], specs[j]
    dx = b.center[0] - a.center[0]
    dy = b.center[1] - a.center[1]
    degenerate = span < DEGENERATE_RANGE
    dz = 0.0 if degenerate else (b.depth_value - a.depth_value) / span
    d3 = math.sqrt(dx * dx + dy * dy + dz * dz)
    boxes = _spec_bbox(a), _spec_bbox(b)
    return _PairGeometry(
        dx=dx,
        dy=dy,
        dz=dz,
        d3=d3,
        gap=_box_gap_vals(*boxes),
        iou=_box_iou_vals(*boxes),
        degenerate=degenerate,
    )


def _depth_span(specs: list[ShapeSpec]) -> float:
    return max(s.depth_value for s in specs) - min(s.depth_value for s in specs)


def analytic_relations(
    specs: list[ShapeSpec], thresholds: Thresholds | None = None
) -> list[tuple[int, int, RelationKind]]:
    """The relation triples a rendered version of these shapes produces."""
    th = thresholds or Thresholds()
    if len(specs) < 2:
        return []
    span = _depth_span(specs)
    triples: list[tuple[int, int, RelationKind]] = []
    for i in range(len(specs)):
        for j in range(len(specs)):
            if i == j:
                continue
            g = _pair_geometry(specs, i, j, span)
            if g.dx > th.tau_xy:
                triples.append((i, j, RelationKind.LEFT_OF))
            elif -g.dx > th.tau_xy:
                triples.append((i, j, RelationKind.RIGHT_OF))
            if g.dy > th.tau_xy:
                triples.append((i, j, RelationKind.ABOVE))
            elif -g.dy > th.tau_xy:
                triples.append((i, j, RelationKind.BELOW))
            if not g.degenerate:
                if g.dz > th.tau_z_frac:
                    triples.append((i, j, RelationKind.IN_FRONT_OF))
                elif -g.dz > th.tau_z_frac:
                    triples.append((i, j, RelationKind.BEHIND))
                if g.d3 <= th.near_dist:
                    triples.append((i, j, RelationKind.NEAR))
                elif g.d3 >= th.far_dist:
                    triples.append((i, j, RelationKind.FAR))
            if g.gap <= th.beside_gap and abs(g.dz) <= th.tau_z_frac:
                triples.append((i, j, RelationKind.BESIDE))
            if not g.degenerate and g.iou >= th.occlusion_overlap:
                if g.dz > th.tau_z_frac:
                    triples.append((i, j, RelationKind.OCCLUDES))
                elif -g.dz > th.tau_z_frac:
                    triples.append((i, j, RelationKind.OCCLUDED_BY))
    triples.sort(key=lambda t: (t[0], KIND_ORDER[t[2]], t[1]))
    return triples


# ---------------------------------------------------------------------------
# margin verification

# Firing rules must clear their threshold by the margin factor; silent
# rules must miss by an absolute cushion chosen to dominate the drift
# between analytic geometry and pixel measurements (centroid and box
# discretization, occlusion bites).

_CUSHION_PLANAR = 0.03
_CUSHION_IOU = 0.008
_CUSHION_DEPTH = 1e-6


def _signed_rule_ok(
    value: float,
    tau: float,
    pos: bool,
    neg: bool,
    m: float,
    cushion: float,
) -> bool:
    # pos fires on value > tau, neg on -value > tau
    if pos:
        return value >= m * tau
    if neg:
        return -value >= m * tau
    return abs(value) <= tau - cushion


def _margins_ok(
    specs: list[ShapeSpec],
    fired: set[tuple[int, int, RelationKind]],
    th: Thresholds,
    m: float,
) -> bool:
    span = _depth_span(specs)
    for i in range(len(specs)):
        for j in range(len(specs)):
            if i == j:
                continue
            g = _pair_geometry(specs, i, j, span)

            def has(kind: RelationKind) -> bool:
                return (i, j, kind) in fired

            if not _signed_rule_ok(
                g.dx,
                th.tau_xy,
                has(RelationKind.LEFT_OF),
                has(RelationKind.RIGHT_OF),
                m,
                _CUSHION_PLANAR,
            ):
                return False
            if not _signed_rule_ok(
                g.dy,
                th.tau_xy,
                has(RelationKind.ABOVE),
                has(RelationKind.BELOW),
                m,
                _CUSHION_PLANAR,
            ):
                return False

            if not g.degenerate:
                if not _signed_rule_ok(
                    g.dz,
                    th.tau_z_frac,
                    has(RelationKind.IN_FRONT_OF),
                    has(RelationKind.BEHIND),
                    m,
                    _CUSHION_DEPTH,
                ):
                    return False
                if has(RelationKind.NEAR):
                    if g.d3 > th.near_dist / m:
                        return False
                elif has(RelationKind.FAR):
                    if g.d3 < m * th.far_dist:
                        return False
                else:
                    if not th.near_dist + _CUSHION_PLANAR <= g.d3 <= th.far_dist - _CUSHION_PLANAR:
                        return False
                occ = has(RelationKind.OCCLUDES)
                occ_by = has(RelationKind.OCCLUDED_BY)
                if occ or occ_by:
                    dz = g.dz if occ else -g.dz
                    if g.iou < m * th.occlusion_overlap or dz < m * th.tau_z_frac:
                        return False
                else:
                    iou_clear = g.iou == 0.0 or g.iou <= th.occlusion_overlap - _CUSHION_IOU
                    depth_clear = abs(g.dz) <= th.tau_z_frac - _CUSHION_DEPTH
                    if not (iou_clear or depth_clear):
                        return False

            if has(RelationKind.BESIDE):
                if g.gap > th.beside_gap / m or abs(g.dz) > th.tau_z_frac / m:
                    return False
            else:
                gap_clear = g.gap >= th.beside_gap + _CUSHION_PLANAR
                depth_off = abs(g.dz) >= th.tau_z_frac + _CUSHION_DEPTH
                if not (gap_clear or depth_off):
                    return False
    return True


# ---------------------------------------------------------------------------
# layout archetypes

# Constants below are chosen so that, after per-center jitter of up to
# 0.003 per axis, every pairwise quantity stays outside the ambiguous
# band at margin factor 2: center offsets are 0 or at least 0.1075,
# packed box gaps stay within [0.014, 0.05], sparse gaps at or above
# 0.134, planar distances within [0.18, 0.47], and cross-tier pairs
# differ by the full depth span so normalized depth deltas are exactly
# 0 or 1.

_JITTER = 0.003

_QUAD_CENTERS = ((0.405, 0.405), (0.595, 0.405), (0.405, 0.595), (0.595, 0.595))
_QUAD_PACKED_E = (0.075, 0.085)
_QUAD_SPARSE_E = (0.02, 0.027)

_HEX_RADIUS = 0.215
_HEX_PACKED_E = (0.0855, 0.0915)
_HEX_SPARSE_E = (0.02, 0.0375)

_OCCL_TARGET = (0.40, 0.40)
_OCCL_EXTENT = (0.11, 0.13)
_OCCL_OFFSET_FACTOR = 1.14
_OCCL_SATELLITES = ((0.72, 0.40), (0.40, 0.72))
_OCCL_SATELLITE_E = (0.02, 0.04)

_CLUSTER_ANCHORS = ((0.27, 0.27), (0.73, 0.73))
_CLUSTER_HALF_STEP = 0.095


@dataclass
class _Placement:
    center: tuple[float, float]
    extent: tuple[float, float]
    kind: str
    tier: int  # 0 = far, 1 = near


def _jitter(rng: SplitMix64, point: tuple[float, float]) -> tuple[float, float]:
    return (
        point[0] + rng.uniform(-_JITTER, _JITTER),
        point[1] + rng.uniform(-_JITTER, _JITTER),
    )


def _square(rng: SplitMix64, lo: float, hi: float) -> tuple[float, float]:
    e = rng.uniform(lo, hi)
    return (e, e)


def _any_kind(rng: SplitMix64) -> str:
    return rng.choice((RECT, ELLIPSE))


def _lattice(anchor: tuple[float, float]) -> list[tuple[float, float]]:
    ax, ay = anchor
    h = _CLUSTER_HALF_STEP
    return [(ax - h, ay - h), (ax + h, ay - h), (ax - h, ay + h), (ax + h, ay + h)]


def _quad_placements(rng: SplitMix64, n: int) -> list[_Placement]:
    slots = list(_QUAD_CENTERS)
    rng.shuffle(slots)
    packed = rng.next_float() < 0.5
    lo, hi = _QUAD_PACKED_E if packed else _QUAD_SPARSE_E
    two_tiers = rng.next_float() < 0.5
    return [
        _Placement(
            center=_jitter(rng, slots[k]),
            extent=_square(rng, lo, hi),
            kind=_any_kind(rng),
            tier=rng.randint(0, 1) if two_tiers else 0,
        )
        for k in range(n)
    ]


def _hex_placements(rng: SplitMix64, n: int, anchor=(0.5, 0.5), sparse_only=False) -> list[_Placement]:
    cx, cy = anchor
    slots = [(cx, cy)] + [
        (
            cx + _HEX_RADIUS * math.cos(math.radians(60 * k)),
            cy + _HEX_RADIUS * math.sin(math.radians(60 * k)),
        )
        for k in range(6)
    ]
    rng.shuffle(slots)
    packed = (not sparse_only) and rng.next_float() < 0.5
    lo, hi = _HEX_PACKED_E if packed else _HEX_SPARSE_E
    two_tiers = rng.next_float() < 0.5
    return [
        _Placement(
            center=_jitter(rng, slots[k]),
            extent=_square(rng, lo, hi),
            kind=_any_kind(rng),
            tier=rng.randint(0, 1) if two_tiers else 0,
        )
        for k in range(n)
    ]


def _occl_placements(rng: SplitMix64, n: int) -> list[_Placement]:
    target_center = _jitter(rng, _OCCL_TARGET)
    et = rng.uniform(*_OCCL_EXTENT)
    shift = _OCCL_OFFSET_FACTOR * et
    occluder_center = _jitter(
        rng, (target_center[0] + shift, target_center[1] + shift)
    )
    out = [
        _Placement(center=target_center, extent=(et, et), kind=_any_kind(rng), tier=0),
        _Placement(
            center=occluder_center, extent=(et / 2.0, et / 2.0), kind=RECT, tier=1
        ),
    ]
    for k in range(n - 2):
        out.append(
            _Placement(
                center=_jitter(rng, _OCCL_SATELLITES[k]),
                extent=_square(rng, *_OCCL_SATELLITE_E),
                kind=_any_kind(rng),
                tier=0,
            )
        )
    return out


def _cluster_placements(rng: SplitMix64, n: int) -> list[_Placement]:
    anchors = list(_CLUSTER_ANCHORS)
    rng.shuffle(anchors)
    sizes = (4, n - 4)
    out: list[_Placement] = []
    for which, (anchor, size) in enumerate(zip(anchors, sizes)):
        slots = _lattice(anchor)
        rng.shuffle(slots)
        packed = rng.next_float() < 0.5
        lo, hi = _QUAD_PACKED_E if packed else _QUAD_SPARSE_E
        for k in range(size):
            out.append(
                _Placement(
                    center=_jitter(rng, slots[k]),
                    extent=_square(rng, lo, hi),
                    kind=_any_kind(rng),
                    tier=which,
                )
            )
    return out


def _hex_quad_placements(rng: SplitMix64, n: int) -> list[_Placement]:
    out = _hex_placements(rng, 7, anchor=(0.27, 0.27), sparse_only=True)
    quad_tier = rng.randint(0, 1)
    for p in out:
        p.tier = 1 - quad_tier
    slots = _lattice((0.73, 0.73))
    rng.shuffle(slots)
    packed = rng.next_float() < 0.5
    lo, hi = _QUAD_PACKED_E if packed else _QUAD_SPARSE_E
    for k in range(n - 7):
        out.append(
            _Placement(
                center=_jitter(rng, slots[k]),
                extent=_square(rng, lo, hi),
                kind=_any_kind(rng),
                tier=quad_tier,
            )
        )
    return out


def _build_placements(rng: SplitMix64, n: int) -> list[_Placement] | None:
    builders = []
    if 1 <= n <= 4:
        builders.append(_quad_placements)
    if 2 <= n <= 4:
        builders.append(_occl_placements)
    if 2 <= n <= 7:
        builders.append(_hex_placements)
    if 5 <= n <= 8:
        builders.append(_cluster_placements)
    if 9 <= n <= 11:
        builders.append(_hex_quad_placements)
    if not builders:
        return None
    return rng.choice(builders)(rng, n)


def _specs_from_placements(rng: SplitMix64, placed: list[_Placement]) -> list[ShapeSpec]:
    near_value = rng.uniform(0.2, 0.4)
    far_value = near_value + rng.uniform(0.3, 0.5)
    tier_depth = (far_value, near_value)
    depths = [tier_depth[p.tier] for p in placed]
    # back to front: larger depth paints first
    order = sorted(range(len(placed)), key=lambda i: (-depths[i], i))
    z_of = {idx: z for z, idx in enumerate(order)}
    return [
        ShapeSpec(
            kind=p.kind,
            class_label=rng.choice(_CLASSES),
            color=rng.choice(COLOR_NAMES),
            center=p.center,
            half_extents=p.extent,
            depth_value=depths[i],
            z_order=z_of[i],
        )
        for i, p in enumerate(placed)
    ]


def _census(specs: list[ShapeSpec]) -> dict[tuple[str, str], int]:
    out: dict[tuple[str, str], int] = {}
    for s in specs:
        key = (s.class_label, s.color)
        out[key] = out.get(key, 0) + 1
    return out


MAX_ATTEMPTS = 1000


def random_scene(
    seed: int,
    n_shapes: int,
    margin_factor: float = 2.0,
    dims: tuple[int, int] = (256, 256),
) -> tuple[SceneInput, GroundTruth]:
    """A reproducible random scene plus the relations it must exhibit.

    Every decision quantity in the generated layout clears (or misses)
    its threshold by at least margin_factor, verified rule by rule
    before the scene is accepted. Requests with no compliant layout
    raise GenerationError once MAX_ATTEMPTS layouts have been rejected.
    """
    if n_shapes < 1:
        raise ValidationError(f"n_shapes must be at least 1, got {n_shapes}")
    if margin_factor < 1.0:
        raise ValidationError(
            f"margin_factor must be at least 1, got {margin_factor}"
        )
    width, height = dims
    if width < 16 or height < 16:
        raise ValidationError(f"scene size {width}x{height} is too small")
    th = Thresholds()
    rng = SplitMix64(seed)
    for _ in range(MAX_ATTEMPTS):
        placed = _build_placements(rng, n_shapes)
        if placed is None:
            continue
        specs = _specs_from_placements(rng, placed)
        triples = analytic_relations(specs, th)
        if not _margins_ok(specs, set(triples), th, margin_factor):
            continue
        scene = render_scene(specs, width, height)
        truth = GroundTruth(
            width=width,
            height=height,
            specs=specs,
            relations=triples,
            census=_census(specs),
        )
        return scene, truth
    raise GenerationError(
        f"seed {seed}: no layout with {n_shapes} shapes satisfies "
        f"margin factor {margin_factor} after {MAX_ATTEMPTS} attempts"
    )


# ---------------------------------------------------------------------------
# ground truth interchange


def write_truth(truth: GroundTruth) -> bytes:
    doc = {
        "image": {"width": truth.width, "height": truth.height},
        "instances": [
            {
                "id": i,
                "class": s.class_label,
                "color": s.color,
                "kind": s.kind,
                "center": list(s.center),
                "half_extents": list(s.half_extents),
                "depth_value": s.depth_value,
                "z_order": s.z_order,
            }
            for i, s in enumerate(truth.specs)
        ],
        "relations": [
            {"subject_id": i, "object_id": j, "kind": kind.value}
            for i, j, kind in truth.relations
        ],
        "census": [
            {"class": c, "color": col, "count": count}
            for (c, col), count in sorted(truth.census.items())
        ],
    }
    return dumps_canonical(doc, indent=2)


def read_truth(data: bytes) -> GroundTruth:
    doc = _parse_json(data)
    image = _get(doc, "image", "$")
    width = _as_int(_get(image, "width", "$.image"), "$.image.width")
    height = _as_int(_get(image, "height", "$.image"), "$.image.height")
    raw_instances = _get(doc, "instances", "$")
    raw_relations = _get(doc, "relations", "$")
    raw_census = _get(doc, "census", "$")
    if not all(isinstance(x, list) for x in (raw_instances, raw_relations, raw_census)):
        raise FormatError("instances, relations, and census must be arrays", "$")

    specs: list[ShapeSpec] = []
    for idx, entry in enumerate(raw_instances):
        path = f"$.instances[{idx}]"
        if _as_int(_get(entry, "id", path), f"{path}.id") != idx:
            raise FormatError(f"instance ids must run 0..{len(raw_instances) - 1}", path)
        center = _get(entry, "center", path)
        extents = _get(entry, "half_extents", path)
        if not (isinstance(center, list) and len(center) == 2):
            raise FormatError("center must be [x, y]", f"{path}.center")
        if not (isinstance(extents, list) and len(extents) == 2):
            raise FormatError("half_extents must be [x, y]", f"{path}.half_extents")
        kind = _as_str(_get(entry, "kind", path), f"{path}.kind")
        if kind not in (RECT, ELLIPSE):
            raise FormatError(f"unknown shape kind {kind!r}", f"{path}.kind")
        specs.append(
            ShapeSpec(
                kind=kind,
                class_label=_as_str(_get(entry, "class", path), f"{path}.class"),
                color=_as_str(_get(entry, "color", path), f"{path}.color"),
                center=(
                    _as_num(center[0], f"{path}.center[0]"),
                    _as_num(center[1], f"{path}.center[1]"),
                ),
                half_extents=(
                    _as_num(extents[0], f"{path}.half_extents[0]"),
                    _as_num(extents[1], f"{path}.half_extents[1]"),
                ),
                depth_value=_as_num(_get(entry, "depth_value", path), f"{path}.depth_value"),
                z_order=_as_int(_get(entry, "z_order", path), f"{path}.z_order"),
            )
        )

    relations: list[tuple[int, int, RelationKind]] = []
    for idx, entry in enumerate(raw_relations):
        path = f"$.relations[{idx}]"
        name = _as_str(_get(entry, "kind", path), f"{path}.kind")
        try:
            kind = RelationKind(name)
        except ValueError:
            raise FormatError(f"unknown relation kind {name!r}", f"{path}.kind") from None
        subject = _as_int(_get(entry, "subject_id", path), f"{path}.subject_id")
        obj = _as_int(_get(entry, "object_id", path), f"{path}.object_id")
        if not (0 <= subject < len(specs)) or not (0 <= obj < len(specs)):
            raise FormatError("relation references an unknown instance", path)
        relations.append((subject, obj, kind))

    census: dict[tuple[str, str], int] = {}
    for idx, entry in enumerate(raw_census):
        path = f"$.census[{idx}]"
        key = (
            _as_str(_get(entry, "class", path), f"{path}.class"),
            _as_str(_get(entry, "color", path), f"{path}.color"),
        )
        count = _as_int(_get(entry, "count", path), f"{path}.count")
        if count < 1:
            raise FormatError(f"census count must be positive, got {count}", path)
        if key in census:
            raise FormatError(f"duplicate census entry for {key}", path)
        census[key] = count

    return GroundTruth(
        width=width, height=height, specs=specs, relations=relations, census=census
    )
