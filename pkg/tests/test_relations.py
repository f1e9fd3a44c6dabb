"""Pairwise relation rules and graph invariants.

Each rule gets a constructed-mask example where the expected outcome
was worked out by hand, plus direct checks on the strength formulas.
Structural invariants (converse totality, strength symmetry, mutual
exclusion) are exercised through the validator on composed graphs and
through deliberately corrupted graphs.
"""

import dataclasses

import numpy as np
import pytest

import symscene as ss
from symscene.interchange import DepthMap, InstanceRecord, SceneInput
from symscene.knowledge import KIND_ORDER, PHRASES, RelationKind
from symscene.relations import _bbox_iou, _box_gap, _over, _under


def build_scene(masks, depths, labels=None, prompt=None, w=None, h=None):
    """Scene from boolean masks and per-instance constant depths."""
    h0, w0 = masks[0].shape
    w = w or w0
    h = h or h0
    depth = np.full((h, w), 100.0, dtype=np.float32)
    for m, d in zip(masks, depths):
        depth[m] = d
    records = [
        InstanceRecord(
            id=i,
            class_label=(labels[i] if labels else f"c{i}"),
            score=None,
            rle=ss.rle_encode(m),
        )
        for i, m in enumerate(masks)
    ]
    return SceneInput(w, h, records, DepthMap(w, h, depth), source_prompt=prompt)


def box(h, w, r0, r1, c0, c1):
    m = np.zeros((h, w), dtype=bool)
    m[r0:r1, c0:c1] = True
    return m


def kinds_between(graph, a, b):
    return [e.kind for e in graph.relations if e.subject_id == a and e.object_id == b]


# ---------------------------------------------------------------------------
# individual rules


def test_left_right_pair():
    # centroids at x=0.1 and x=0.9: far apart horizontally, same row
    masks = [box(20, 40, 8, 12, 2, 7), box(20, 40, 8, 12, 33, 38)]
    graph = ss.compose_scene(build_scene(masks, [1.0, 5.0]))
    forward = kinds_between(graph, 0, 1)
    assert RelationKind.LEFT_OF in forward
    assert RelationKind.RIGHT_OF in kinds_between(graph, 1, 0)
    assert RelationKind.RIGHT_OF not in forward


def test_above_below_pair():
    masks = [box(40, 20, 2, 7, 8, 12), box(40, 20, 33, 38, 8, 12)]
    graph = ss.compose_scene(build_scene(masks, [1.0, 5.0]))
    assert RelationKind.ABOVE in kinds_between(graph, 0, 1)
    assert RelationKind.BELOW in kinds_between(graph, 1, 0)


def test_front_behind_depth_rule():
    masks = [box(16, 32, 4, 10, 2, 8), box(16, 32, 4, 10, 22, 28)]
    graph = ss.compose_scene(build_scene(masks, [1.0, 9.0]))
    # instance 0 is nearer (smaller depth value)
    assert RelationKind.IN_FRONT_OF in kinds_between(graph, 0, 1)
    assert RelationKind.BEHIND in kinds_between(graph, 1, 0)


def test_near_small_displacement():
    masks = [box(64, 64, 28, 34, 24, 30), box(64, 64, 28, 34, 32, 38)]
    # same depth tier but a third instance stretches the scene range so the
    # pair is not degenerate
    far = box(64, 64, 2, 6, 2, 6)
    graph = ss.compose_scene(build_scene([*masks, far], [2.0, 2.0, 8.0]))
    assert RelationKind.NEAR in kinds_between(graph, 0, 1)
    assert RelationKind.NEAR in kinds_between(graph, 1, 0)


def test_far_rule_uses_3d_distance():
    masks = [box(64, 64, 2, 8, 2, 8), box(64, 64, 56, 62, 56, 62)]
    graph = ss.compose_scene(build_scene(masks, [1.0, 9.0]))
    assert RelationKind.FAR in kinds_between(graph, 0, 1)
    assert RelationKind.FAR in kinds_between(graph, 1, 0)


def test_inside_contains_nested_squares():
    outer = box(40, 40, 5, 35, 5, 35)
    inner = box(40, 40, 15, 25, 15, 25)
    graph = ss.compose_scene(build_scene([outer, inner], [4.0, 4.0]))
    assert RelationKind.CONTAINS in kinds_between(graph, 0, 1)
    assert RelationKind.INSIDE in kinds_between(graph, 1, 0)
    # full nesting also counts as overlap
    assert RelationKind.OVERLAPS in kinds_between(graph, 0, 1)


def test_partial_overlap_without_containment():
    a = box(30, 30, 5, 20, 5, 20)
    b = box(30, 30, 15, 28, 15, 28)
    graph = ss.compose_scene(build_scene([a, b], [3.0, 3.0]))
    forward = kinds_between(graph, 0, 1)
    assert RelationKind.OVERLAPS in forward
    assert RelationKind.INSIDE not in forward
    assert RelationKind.CONTAINS not in forward
    assert RelationKind.BESIDE not in forward


def test_single_shared_pixel_is_overlap():
    a = box(20, 20, 4, 10, 4, 10)
    b = box(20, 20, 9, 15, 9, 15)  # intersection is exactly pixel (9, 9)
    assert int((a & b).sum()) == 1
    graph = ss.compose_scene(build_scene([a, b], [2.0, 2.0]))
    assert RelationKind.OVERLAPS in kinds_between(graph, 0, 1)


def test_beside_requires_disjoint_small_gap_same_depth():
    a = box(64, 64, 28, 36, 20, 28)
    b = box(64, 64, 28, 36, 30, 38)
    far = box(64, 64, 2, 5, 2, 5)
    graph = ss.compose_scene(build_scene([a, b, far], [2.0, 2.0, 9.0]))
    assert RelationKind.BESIDE in kinds_between(graph, 0, 1)
    # depth-separated pair with the same planar gap is not beside
    graph2 = ss.compose_scene(build_scene([a, b, far], [2.0, 9.0, 9.0]))
    assert RelationKind.BESIDE not in kinds_between(graph2, 0, 1)


def test_beside_gap_is_chebyshev():
    # boxes offset diagonally: per-axis gaps differ, the larger one governs
    a = box(100, 100, 10, 20, 10, 20)
    b = box(100, 100, 22, 32, 24, 34)
    ka, kb = ss.analyze_scene(build_scene([a, b], [1.0, 1.0]))
    gx = kb.bbox[0] - ka.bbox[2]
    gy = kb.bbox[1] - ka.bbox[3]
    assert _box_gap(ka, kb) == pytest.approx(max(gx, gy))
    assert _box_gap(kb, ka) == _box_gap(ka, kb)


def test_occludes_needs_bbox_overlap_and_depth_gap():
    back = box(50, 50, 10, 40, 10, 40)
    front = box(50, 50, 5, 25, 5, 25) & ~back  # visible part of the front shape
    graph = ss.compose_scene(build_scene([front, back], [1.0, 9.0]))
    assert RelationKind.OCCLUDES in kinds_between(graph, 0, 1)
    assert RelationKind.OCCLUDED_BY in kinds_between(graph, 1, 0)
    # kill the depth gap: no occlusion at equal depth
    far = box(50, 50, 46, 49, 46, 49)
    graph2 = ss.compose_scene(build_scene([front, back, far], [5.0, 5.0, 9.0]))
    assert RelationKind.OCCLUDES not in kinds_between(graph2, 0, 1)


def test_no_occlusion_when_bboxes_apart():
    a = box(50, 50, 2, 10, 2, 10)
    b = box(50, 50, 40, 48, 40, 48)
    graph = ss.compose_scene(build_scene([a, b], [1.0, 9.0]))
    assert RelationKind.OCCLUDES not in kinds_between(graph, 0, 1)


def test_degenerate_depth_suppresses_z_family():
    a = box(30, 30, 5, 12, 5, 12)
    b = box(30, 30, 5, 12, 18, 25)
    graph = ss.compose_scene(build_scene([a, b], [4.0, 4.0]))
    for e in graph.relations:
        assert e.kind not in {
            RelationKind.IN_FRONT_OF,
            RelationKind.BEHIND,
            RelationKind.NEAR,
            RelationKind.FAR,
            RelationKind.OCCLUDES,
            RelationKind.OCCLUDED_BY,
        }
    # the planar relation still fires
    assert RelationKind.LEFT_OF in kinds_between(graph, 0, 1)


# ---------------------------------------------------------------------------
# strength formulas


def test_strength_helpers():
    assert _over(2.0, 1.0) == 1.0
    assert _over(1.0, 1.0) == 0.0
    assert _over(1.5, 1.0) == pytest.approx(0.5)
    assert _over(10.0, 1.0) == 1.0  # clamped
    assert _under(0.0, 2.0) == 1.0
    assert _under(2.0, 2.0) == 0.0
    assert _under(1.0, 2.0) == pytest.approx(0.5)


def test_left_of_strength_value():
    # dx = 30/99; tau 0.05 -> strength clamp(dx/tau - 1) = 1 (dx > 2*tau)
    a = box(100, 100, 45, 55, 10, 20)
    b = box(100, 100, 45, 55, 40, 50)
    graph = ss.compose_scene(build_scene([a, b], [1.0, 1.0]))
    edge = next(e for e in graph.relations if e.kind is RelationKind.LEFT_OF)
    dx = 30 / 99
    assert edge.strength == pytest.approx(min(1.0, dx / 0.05 - 1.0))


def test_strengths_bounded():
    rng = np.random.default_rng(3)
    for seed in range(6):
        scene, _ = ss.random_scene(seed=seed, n_shapes=4)
        graph = ss.compose_scene(scene)
        for e in graph.relations:
            assert 0.0 <= e.strength <= 1.0


def test_edges_sorted_and_phrased():
    scene, _ = ss.random_scene(seed=1, n_shapes=4)
    graph = ss.compose_scene(scene)
    keys = [(e.subject_id, KIND_ORDER[e.kind], e.object_id) for e in graph.relations]
    assert keys == sorted(keys)
    for e in graph.relations:
        assert e.phrase == PHRASES[e.kind]
    assert PHRASES[RelationKind.ABOVE] == "at the top of"
    assert PHRASES[RelationKind.BELOW] == "at the bottom of"


# ---------------------------------------------------------------------------
# depth range and bbox iou helpers


def test_scene_depth_range_percentile_based():
    masks = [box(10, 10, 0, 3, 0, 3), box(10, 10, 6, 9, 6, 9)]
    scene = build_scene(masks, [2.0, 7.0])
    knowledge = ss.analyze_scene(scene)
    assert ss.scene_depth_range(knowledge) == (2.0, 7.0)


def test_scene_depth_range_empty_rejected():
    with pytest.raises(ss.ValidationError):
        ss.scene_depth_range([])


def test_bbox_iou_disjoint_zero():
    a = box(20, 20, 1, 5, 1, 5)
    b = box(20, 20, 10, 15, 10, 15)
    ka, kb = ss.analyze_scene(build_scene([a, b], [1.0, 1.0]))
    assert _bbox_iou(ka, kb) == 0.0


def test_bbox_iou_identical_one():
    a = box(20, 20, 4, 9, 4, 9)
    ka, = ss.analyze_scene(build_scene([a], [1.0]))
    assert _bbox_iou(ka, ka) == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# prompt restriction


def test_prompt_restricts_pairs_not_nodes():
    masks = [
        box(64, 64, 4, 14, 4, 14),
        box(64, 64, 4, 14, 44, 54),
        box(64, 64, 44, 54, 24, 34),
    ]
    labels = ["cat", "cat", "lamp"]
    full = ss.compose_scene(build_scene(masks, [1.0, 1.0, 9.0], labels=labels))
    pruned = ss.compose_scene(
        build_scene(masks, [1.0, 1.0, 9.0], labels=labels, prompt="the cat please")
    )
    assert [k.id for k in pruned.instances] == [0, 1, 2]
    endpoints = {(e.subject_id, e.object_id) for e in pruned.relations}
    assert endpoints == {(0, 1), (1, 0)}
    assert len(pruned.relations) < len(full.relations)
    assert pruned.meta["source_prompt"] == "the cat please"


def test_prompt_without_match_keeps_all_pairs():
    masks = [box(32, 32, 2, 10, 2, 10), box(32, 32, 20, 28, 20, 28)]
    base = ss.compose_scene(build_scene(masks, [1.0, 9.0], labels=["a", "b"]))
    loose = ss.compose_scene(
        build_scene(masks, [1.0, 9.0], labels=["a", "b"], prompt="zebra herd")
    )
    assert [dataclasses.astuple(e) for e in loose.relations] == [
        dataclasses.astuple(e) for e in base.relations
    ]


def test_prompt_match_case_insensitive():
    masks = [box(32, 32, 2, 10, 2, 10), box(32, 32, 20, 28, 20, 28)]
    graph = ss.compose_scene(
        build_scene(masks, [1.0, 9.0], labels=["Dog", "chair"], prompt="where is the DOG?")
    )
    assert graph.relations == []


def test_empty_scene_graph_keeps_meta():
    scene = SceneInput(8, 8, [], DepthMap(8, 8, np.ones((8, 8), dtype=np.float32)))
    graph = ss.compose_scene(scene)
    assert graph.instances == [] and graph.relations == []
    assert graph.meta["image"] == {"width": 8, "height": 8}
    assert set(graph.meta["thresholds"]) == set(ss.THRESHOLD_NAMES)
    ss.validate_graph(graph)


# ---------------------------------------------------------------------------
# validator


def composed_example():
    masks = [box(48, 48, 4, 16, 4, 16), box(48, 48, 30, 42, 30, 42)]
    return ss.compose_scene(build_scene(masks, [1.0, 9.0]))


def test_validator_accepts_composed_graphs():
    for seed in range(8):
        scene, _ = ss.random_scene(seed=seed, n_shapes=3)
        ss.validate_graph(ss.compose_scene(scene))


def test_validator_rejects_missing_converse():
    graph = composed_example()
    graph.relations = [e for e in graph.relations if e.kind is not RelationKind.RIGHT_OF]
    with pytest.raises(ss.ValidationError, match="converse"):
        ss.validate_graph(graph)


def test_validator_rejects_strength_mismatch():
    graph = composed_example()
    bumped = dataclasses.replace(graph.relations[0], strength=graph.relations[0].strength / 2 + 0.4)
    graph.relations[0] = bumped
    with pytest.raises(ss.ValidationError):
        ss.validate_graph(graph)


def test_validator_rejects_wrong_phrase():
    graph = composed_example()
    graph.relations[0] = dataclasses.replace(graph.relations[0], phrase="next to")
    with pytest.raises(ss.ValidationError, match="phrase"):
        ss.validate_graph(graph)


def test_validator_rejects_duplicate_edge():
    graph = composed_example()
    graph.relations.append(graph.relations[0])
    with pytest.raises(ss.ValidationError, match="duplicate"):
        ss.validate_graph(graph)


def test_validator_rejects_self_edge():
    graph = composed_example()
    e = graph.relations[0]
    graph.relations.append(dataclasses.replace(e, object_id=e.subject_id))
    with pytest.raises(ss.ValidationError):
        ss.validate_graph(graph)


def test_validator_rejects_unknown_endpoint():
    graph = composed_example()
    graph.relations[0] = dataclasses.replace(graph.relations[0], object_id=99)
    with pytest.raises(ss.ValidationError):
        ss.validate_graph(graph)


def test_validator_rejects_mutual_exclusion_breach():
    graph = composed_example()
    left = next(e for e in graph.relations if e.kind is RelationKind.LEFT_OF)
    right_back = dataclasses.replace(
        left,
        subject_id=left.object_id,
        object_id=left.subject_id,
        kind=RelationKind.LEFT_OF,
        phrase=PHRASES[RelationKind.LEFT_OF],
    )
    # give the pair LEFT_OF in both directions: each direction then carries
    # LEFT_OF and RIGHT_OF simultaneously once converses are present
    graph.relations.append(right_back)
    graph.relations.append(
        dataclasses.replace(
            left, kind=RelationKind.RIGHT_OF, phrase=PHRASES[RelationKind.RIGHT_OF]
        )
    )
    with pytest.raises(ss.ValidationError):
        ss.validate_graph(graph)


def test_validator_rejects_out_of_range_strength():
    graph = composed_example()
    graph.relations[0] = dataclasses.replace(graph.relations[0], strength=1.5)
    with pytest.raises(ss.ValidationError):
        ss.validate_graph(graph)


def test_validator_rejects_duplicate_instance_ids():
    graph = composed_example()
    graph.instances.append(graph.instances[0])
    with pytest.raises(ss.ValidationError, match="id"):
        ss.validate_graph(graph)


# ---------------------------------------------------------------------------
# converse structure over random scenes


def test_converse_totality_and_strength_equality():
    for seed in range(12):
        scene, _ = ss.random_scene(seed=seed, n_shapes=5)
        graph = ss.compose_scene(scene)
        index = {(e.subject_id, e.object_id, e.kind): e.strength for e in graph.relations}
        for (s, o, k), strength in index.items():
            mate = index.get((o, s, ss.CONVERSE[k]))
            assert mate is not None
            assert abs(mate - strength) <= 1e-9
