"""Pairwise relation classification and scene graph composition.

Decision rules for an ordered pair (subject a, object b), with y growing
downward and larger depth farther away:

  LEFT_OF      b.cx - a.cx > tau_xy              (RIGHT_OF mirrored)
  ABOVE        b.cy - a.cy > tau_xy              (BELOW mirrored)
  IN_FRONT_OF  (b.mean - a.mean) / range > tau_z_frac   (BEHIND mirrored)
  NEAR / FAR   3-d centroid distance <= near_dist / >= far_dist,
               depth axis normalized by the scene range
  OVERLAPS     foreground intersection >= 1 pixel
  INSIDE       |A∩B| / |A| >= inside_containment and a smaller than b
  CONTAINS     mirror of INSIDE
  OCCLUDES     bbox IoU >= occlusion_overlap, pair not in a containment
               configuration, and a closer than b by tau_z_frac * range
  BESIDE       no pixel overlap, box separation <= beside_gap on both
               axes (Chebyshev box gap), and depth difference within
               tau_z_frac of the range

A degenerate depth range (below 1e-9) suppresses every rule that needs
one (front/behind, near/far, occlusion); BESIDE then treats the depth
difference as zero. Edge strength is the margin past the threshold,
normalized by the threshold and clamped to [0, 1]; conjunctive rules use
one designated conjunct (containment ratio, depth separation, box gap,
overlap count) chosen symmetric in (a, b) so converse edges carry equal
strength.
"""

from __future__ import annotations

import numpy as np

from .analysis import analyze_scene
from .errors import ValidationError
from .interchange import SceneInput
from .knowledge import (
    CONVERSE,
    KIND_ORDER,
    PHRASES,
    InstanceKnowledge,
    RelationEdge,
    RelationKind,
    SceneGraph,
    Thresholds,
)
from .rle import rle_decode

DEGENERATE_RANGE = 1e-9


def scene_depth_range(knowledge: list[InstanceKnowledge]) -> tuple[float, float]:
    """Scene depth span: (min of depth_p05, max of depth_p95)."""
    if not knowledge:
        raise ValidationError("depth range of a scene with no instances")
    lo = min(k.depth_p05 for k in knowledge)
    hi = max(k.depth_p95 for k in knowledge)
    return lo, hi


def _over(value: float, tau: float) -> float:
    # strength for rules firing on value > tau
    return float(min(1.0, max(0.0, value / tau - 1.0)))


def _under(value: float, tau: float) -> float:
    # strength for rules firing on value <= tau
    return float(min(1.0, max(0.0, 1.0 - value / tau)))


def _bbox_iou(a: InstanceKnowledge, b: InstanceKnowledge) -> float:
    ax0, ay0, ax1, ay1 = a.bbox
    bx0, by0, bx1, by1 = b.bbox
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def _box_gap(a: InstanceKnowledge, b: InstanceKnowledge) -> float:
    """Chebyshev separation of two boxes: max of the signed per-axis gaps."""
    ax0, ay0, ax1, ay1 = a.bbox
    bx0, by0, bx1, by1 = b.bbox
    gx = max(ax0, bx0) - min(ax1, bx1)
    gy = max(ay0, by0) - min(ay1, by1)
    return max(gx, gy)


def classify_pair(
    a: InstanceKnowledge,
    b: InstanceKnowledge,
    a_mask: np.ndarray,
    b_mask: np.ndarray,
    depth_range: tuple[float, float],
    thresholds: Thresholds | None = None,
) -> list[RelationEdge]:
    """All relations holding for the ordered pair (a, b), kind-ordered."""
    th = thresholds or Thresholds()
    lo, hi = depth_range
    span = hi - lo
    degenerate = span < DEGENERATE_RANGE

    fired: list[tuple[RelationKind, float]] = []

    dx = b.centroid[0] - a.centroid[0]
    dy = b.centroid[1] - a.centroid[1]
    if dx > th.tau_xy:
        fired.append((RelationKind.LEFT_OF, _over(dx, th.tau_xy)))
    elif -dx > th.tau_xy:
        fired.append((RelationKind.RIGHT_OF, _over(-dx, th.tau_xy)))
    if dy > th.tau_xy:
        fired.append((RelationKind.ABOVE, _over(dy, th.tau_xy)))
    elif -dy > th.tau_xy:
        fired.append((RelationKind.BELOW, _over(-dy, th.tau_xy)))

    dz = 0.0
    if not degenerate:
        dz = (b.mean_depth - a.mean_depth) / span
        if dz > th.tau_z_frac:
            fired.append((RelationKind.IN_FRONT_OF, _over(dz, th.tau_z_frac)))
        elif -dz > th.tau_z_frac:
            fired.append((RelationKind.BEHIND, _over(-dz, th.tau_z_frac)))
        d3 = float(np.sqrt(dx * dx + dy * dy + dz * dz))
        if d3 <= th.near_dist:
            fired.append((RelationKind.NEAR, _under(d3, th.near_dist)))
        elif d3 >= th.far_dist:
            fired.append((RelationKind.FAR, _over(d3, th.far_dist)))

    inter_px = int(np.logical_and(a_mask, b_mask).sum())
    contain_a = inter_px / a.area_px  # fraction of a lying inside b
    contain_b = inter_px / b.area_px
    inside_cfg = (contain_a >= th.inside_containment and a.area_px < b.area_px) or (
        contain_b >= th.inside_containment and b.area_px < a.area_px
    )

    if contain_a >= th.inside_containment and a.area_px < b.area_px:
        fired.append((RelationKind.INSIDE, _over(contain_a, th.inside_containment)))
    if contain_b >= th.inside_containment and b.area_px < a.area_px:
        fired.append((RelationKind.CONTAINS, _over(contain_b, th.inside_containment)))

    if inter_px >= 1:
        fired.append((RelationKind.OVERLAPS, _over(float(inter_px), 1.0)))
    else:
        gap = _box_gap(a, b)
        if gap <= th.beside_gap and abs(dz) <= th.tau_z_frac:
            fired.append((RelationKind.BESIDE, _under(gap, th.beside_gap)))

    if not degenerate and not inside_cfg and _bbox_iou(a, b) >= th.occlusion_overlap:
        if dz > th.tau_z_frac:
            # a closer to the camera than b by a clear margin
            fired.append((RelationKind.OCCLUDES, _over(dz, th.tau_z_frac)))
        elif -dz > th.tau_z_frac:
            fired.append((RelationKind.OCCLUDED_BY, _over(-dz, th.tau_z_frac)))

    fired.sort(key=lambda kv: KIND_ORDER[kv[0]])
    return [
        RelationEdge(
            subject_id=a.id,
            object_id=b.id,
            kind=kind,
            strength=strength,
            phrase=PHRASES[kind],
        )
        for kind, strength in fired
    ]


def _prompt_selection(knowledge: list[InstanceKnowledge], prompt: str | None) -> set[int]:
    """Ids of instances whose class occurs in the prompt; everyone if none do."""
    all_ids = {k.id for k in knowledge}
    if not prompt:
        return all_ids
    text = prompt.lower()
    selected = {k.id for k in knowledge if k.class_label.lower() in text}
    return selected or all_ids


def compose_scene(
    scene: SceneInput,
    thresholds: Thresholds | None = None,
    depth_stat: str = "mean",
) -> SceneGraph:
    """Analyze every instance, classify every ordered pair, build the graph.

    When the scene carries a source prompt naming one or more instance
    classes, pair classification is restricted to those instances; the
    node list always covers everything.
    """
    th = thresholds or Thresholds()
    knowledge = analyze_scene(scene, depth_stat=depth_stat)
    meta = {
        "image": {"width": scene.width, "height": scene.height},
        "source_prompt": scene.source_prompt,
        "thresholds": {
            "tau_xy": th.tau_xy,
            "tau_z_frac": th.tau_z_frac,
            "inside_containment": th.inside_containment,
            "beside_gap": th.beside_gap,
            "near_dist": th.near_dist,
            "far_dist": th.far_dist,
            "occlusion_overlap": th.occlusion_overlap,
        },
    }
    if not knowledge:
        return SceneGraph(instances=[], relations=[], meta=meta)

    depth_range = scene_depth_range(knowledge)
    masks = {r.id: rle_decode(r.rle) for r in scene.instances}
    selected = _prompt_selection(knowledge, scene.source_prompt)

    edges: list[RelationEdge] = []
    for a in knowledge:
        if a.id not in selected:
            continue
        for b in knowledge:
            if b.id == a.id or b.id not in selected:
                continue
            edges.extend(classify_pair(a, b, masks[a.id], masks[b.id], depth_range, th))
    edges.sort(key=lambda e: (e.subject_id, KIND_ORDER[e.kind], e.object_id))
    return SceneGraph(instances=knowledge, relations=edges, meta=meta)


_EXCLUSIVE_PAIRS = (
    (RelationKind.LEFT_OF, RelationKind.RIGHT_OF),
    (RelationKind.ABOVE, RelationKind.BELOW),
    (RelationKind.IN_FRONT_OF, RelationKind.BEHIND),
    (RelationKind.NEAR, RelationKind.FAR),
    (RelationKind.INSIDE, RelationKind.CONTAINS),
    (RelationKind.OCCLUDES, RelationKind.OCCLUDED_BY),
)


def validate_graph(graph: SceneGraph) -> None:
    """Check structural invariants; raises ValidationError on violation.

    Verified: unique node ids, edges reference existing distinct nodes,
    phrases match the canonical table, strengths lie in [0, 1], every
    edge has its converse with equal strength (within 1e-9), and no
    ordered pair carries both members of an exclusive kind pair.
    """
    ids = [k.id for k in graph.instances]
    if len(ids) != len(set(ids)):
        raise ValidationError("duplicate instance ids in graph")
    id_set = set(ids)

    by_pair: dict[tuple[int, int], dict[RelationKind, float]] = {}
    for e in graph.relations:
        if e.subject_id not in id_set or e.object_id not in id_set:
            raise ValidationError(
                f"edge references unknown instance: {e.subject_id} -> {e.object_id}"
            )
        if e.subject_id == e.object_id:
            raise ValidationError(f"self-edge on instance {e.subject_id}")
        if e.phrase != PHRASES[e.kind]:
            raise ValidationError(
                f"edge {e.subject_id}->{e.object_id} {e.kind.value} has phrase "
                f"{e.phrase!r}, expected {PHRASES[e.kind]!r}"
            )
        if not 0.0 <= e.strength <= 1.0:
            raise ValidationError(f"strength {e.strength} outside [0, 1]")
        kinds = by_pair.setdefault((e.subject_id, e.object_id), {})
        if e.kind in kinds:
            raise ValidationError(
                f"duplicate edge {e.subject_id}->{e.object_id} {e.kind.value}"
            )
        kinds[e.kind] = e.strength

    for (s, o), kinds in by_pair.items():
        for k1, k2 in _EXCLUSIVE_PAIRS:
            if k1 in kinds and k2 in kinds:
                raise ValidationError(
                    f"pair {s}->{o} carries mutually exclusive {k1.value} and {k2.value}"
                )
        for kind, strength in kinds.items():
            conv = CONVERSE[kind]
            back = by_pair.get((o, s), {})
            if conv not in back:
                raise ValidationError(
                    f"edge {s}->{o} {kind.value} lacks converse {conv.value}"
                )
            if abs(back[conv] - strength) > 1e-9:
                raise ValidationError(
                    f"converse strength mismatch on {s}->{o} {kind.value}: "
                    f"{strength} vs {back[conv]}"
                )
