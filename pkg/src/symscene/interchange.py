"""Bit-exact parsers and writers for the interchange artifacts.

Three formats decouple model inference from symbolic reasoning:

  masks.json   instance masks as column-major run-length counts
  depth.dfm    "DFM1" magic, little-endian u32 width/height, then
               height*width float32 row-major; larger values are farther
  rgb.ppm      binary P6, maxval 255

plus scene_graph.json on the output side. Writers are deterministic:
stable key order, floats at 6 significant digits, '\\n' line ends, UTF-8.
Parsers reject every invariant violation with a located error and never
repair input.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ValidationError
from .knowledge import (
    InstanceKnowledge,
    RelationEdge,
    RelationKind,
    SceneGraph,
)
from .rle import RleMask, foreground_count

DEPTH_MAGIC = b"DFM1"


@dataclass(frozen=True)
class InstanceRecord:
    """One instance as read from masks.json."""

    id: int
    class_label: str
    score: float | None
    rle: RleMask


@dataclass
class DepthMap:
    """Dense depth, values row-major float32, larger = farther."""

    width: int
    height: int
    values: np.ndarray


@dataclass
class SceneInput:
    """Everything the engine needs for one image."""

    width: int
    height: int
    instances: list[InstanceRecord]
    depth: DepthMap
    rgb: np.ndarray | None = None
    source_prompt: str | None = None


# ---------------------------------------------------------------------------
# deterministic JSON

def _fmt_float(v: float) -> str:
    if not math.isfinite(v):
        raise ValidationError(f"non-finite number {v!r} cannot be serialized")
    if v == 0.0:
        return "0"
    return format(float(v), ".6g")


def dumps_canonical(obj, indent: int | None = 2) -> bytes:
    """Serialize to deterministic JSON bytes (insertion-ordered keys)."""
    pieces: list[str] = []

    def emit(x, level: int) -> None:
        if x is None:
            pieces.append("null")
        elif isinstance(x, bool):
            pieces.append("true" if x else "false")
        elif isinstance(x, (int, np.integer)):
            pieces.append(str(int(x)))
        elif isinstance(x, (float, np.floating)):
            pieces.append(_fmt_float(float(x)))
        elif isinstance(x, str):
            pieces.append(json.dumps(x, ensure_ascii=False))
        elif isinstance(x, dict):
            emit_container(x.items(), "{", "}", level, is_dict=True)
        elif isinstance(x, (list, tuple)):
            emit_container(x, "[", "]", level, is_dict=False)
        else:
            raise TypeError(f"cannot serialize {type(x).__name__}")

    def emit_container(items, opener, closer, level, is_dict):
        items = list(items)
        if not items:
            pieces.append(opener + closer)
            return
        pieces.append(opener)
        pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
        for i, item in enumerate(items):
            if i:
                pieces.append(",")
            pieces.append(pad)
            if is_dict:
                k, v = item
                if not isinstance(k, str):
                    raise TypeError("JSON object keys must be strings")
                pieces.append(json.dumps(k, ensure_ascii=False))
                pieces.append(": " if indent is not None else ":")
                emit(v, level + 1)
            else:
                emit(item, level + 1)
        pieces.append("" if indent is None else "\n" + " " * (indent * level))
        pieces.append(closer)

    emit(obj, 0)
    pieces.append("\n")
    return "".join(pieces).encode("utf-8")


# ---------------------------------------------------------------------------
# masks.json

def _parse_json(data: bytes):
    try:
        return json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise FormatError("masks document is not valid UTF-8", f"byte offset {e.start}") from e
    except json.JSONDecodeError as e:
        raise FormatError(f"malformed JSON: {e.msg}", f"byte offset {e.pos}") from e


def _get(obj, key, path):
    if not isinstance(obj, dict):
        raise FormatError(f"expected an object, got {type(obj).__name__}", path)
    if key not in obj:
        raise FormatError(f"missing key '{key}'", path)
    return obj[key]


def _as_int(v, path):
    if isinstance(v, bool) or not isinstance(v, int):
        raise FormatError(f"expected an integer, got {v!r}", path)
    return v


def _as_str(v, path):
    if not isinstance(v, str):
        raise FormatError(f"expected a string, got {v!r}", path)
    return v


def read_masks_json(data: bytes) -> tuple[int, int, str | None, list[InstanceRecord]]:
    """Parse masks.json into (width, height, prompt, records).

    Eager validation: dimensions positive, ids unique, scores in [0, 1],
    counts non-negative ints summing to height*width, and at least one
    foreground pixel per instance.
    """
    doc = _parse_json(data)
    image = _get(doc, "image", "$")
    width = _as_int(_get(image, "width", "$.image"), "$.image.width")
    height = _as_int(_get(image, "height", "$.image"), "$.image.height")
    if width < 1 or height < 1:
        raise ValidationError(f"image dimensions {width}x{height} must be positive", "$.image")
    prompt = _get(doc, "prompt", "$")
    if prompt is not None:
        prompt = _as_str(prompt, "$.prompt")
    raw_instances = _get(doc, "instances", "$")
    if not isinstance(raw_instances, list):
        raise FormatError("expected an array", "$.instances")

    records: list[InstanceRecord] = []
    seen_ids: set[int] = set()
    for i, inst in enumerate(raw_instances):
        path = f"$.instances[{i}]"
        inst_id = _as_int(_get(inst, "id", path), f"{path}.id")
        if inst_id in seen_ids:
            raise ValidationError(f"duplicate instance id {inst_id}", f"{path}.id")
        seen_ids.add(inst_id)
        class_label = _as_str(_get(inst, "class", path), f"{path}.class")
        score = _get(inst, "score", path)
        if score is not None:
            if isinstance(score, bool) or not isinstance(score, (int, float)):
                raise FormatError(f"expected a number or null, got {score!r}", f"{path}.score")
            score = float(score)
            if not 0.0 <= score <= 1.0:
                raise ValidationError(f"score {score} outside [0, 1]", f"{path}.score")
        rle_obj = _get(inst, "rle", path)
        size = _get(rle_obj, "size", f"{path}.rle")
        if (
            not isinstance(size, list)
            or len(size) != 2
            or any(isinstance(s, bool) or not isinstance(s, int) for s in size)
        ):
            raise FormatError("expected [height, width]", f"{path}.rle.size")
        if size != [height, width]:
            raise ValidationError(
                f"mask size {size} does not match image {[height, width]}", f"{path}.rle.size"
            )
        counts = _get(rle_obj, "counts", f"{path}.rle")
        if not isinstance(counts, list):
            raise FormatError("expected an array of run lengths", f"{path}.rle.counts")
        for j, c in enumerate(counts):
            if isinstance(c, bool) or not isinstance(c, int):
                raise FormatError(f"expected an integer run length, got {c!r}", f"{path}.rle.counts[{j}]")
            if c < 0:
                raise ValidationError(f"negative run length {c}", f"{path}.rle.counts[{j}]")
        if sum(counts) != height * width:
            raise ValidationError(
                f"instance {inst_id}: run lengths sum to {sum(counts)}, "
                f"expected {height * width}",
                f"{path}.rle.counts",
            )
        mask = RleMask(size=(height, width), counts=tuple(counts))
        if foreground_count(mask) == 0:
            raise ValidationError(f"instance {inst_id} has an empty mask", f"{path}.rle.counts")
        records.append(InstanceRecord(id=inst_id, class_label=class_label, score=score, rle=mask))
    return width, height, prompt, records


def write_masks_json(
    width: int, height: int, prompt: str | None, records: list[InstanceRecord]
) -> bytes:
    doc = {
        "image": {"width": width, "height": height},
        "prompt": prompt,
        "instances": [
            {
                "id": r.id,
                "class": r.class_label,
                "score": r.score,
                "rle": {"size": [height, width], "counts": list(r.rle.counts)},
            }
            for r in records
        ],
    }
    return dumps_canonical(doc, indent=None)


# ---------------------------------------------------------------------------
# depth.dfm

def read_depth_dfm(data: bytes) -> DepthMap:
    if len(data) < 4 or data[:4] != DEPTH_MAGIC:
        raise FormatError("bad depth magic, expected DFM1", "byte offset 0")
    if len(data) < 12:
        raise FormatError("truncated depth header", f"byte offset {len(data)}")
    width, height = struct.unpack_from("<II", data, 4)
    if width < 1 or height < 1:
        raise ValidationError(f"depth dimensions {width}x{height} must be positive", "byte offset 4")
    expected = 12 + 4 * width * height
    if len(data) != expected:
        raise FormatError(
            f"depth payload is {len(data)} bytes, expected {expected} for {width}x{height}",
            "byte offset 12",
        )
    values = np.frombuffer(data, dtype="<f4", offset=12).reshape(height, width).copy()
    finite = np.isfinite(values.ravel())
    if not finite.all():
        i = int(np.flatnonzero(~finite)[0])
        raise ValidationError(
            f"non-finite depth value at pixel {i}", f"byte offset {12 + 4 * i}"
        )
    return DepthMap(width=int(width), height=int(height), values=values)


def write_depth_dfm(values: np.ndarray) -> bytes:
    if values.ndim != 2 or values.size == 0:
        raise ValidationError("depth grid must be a non-empty 2-d array")
    if not np.isfinite(values).all():
        raise ValidationError("depth grid contains non-finite values")
    h, w = values.shape
    header = DEPTH_MAGIC + struct.pack("<II", w, h)
    return header + np.ascontiguousarray(values, dtype="<f4").tobytes()


# ---------------------------------------------------------------------------
# rgb.ppm

def read_ppm(data: bytes) -> np.ndarray:
    """Parse binary P6 (maxval 255) into a (height, width, 3) uint8 array."""
    pos = 0

    def token() -> bytes:
        nonlocal pos
        while pos < len(data):
            c = data[pos : pos + 1]
            if c in b" \t\r\n":
                pos += 1
            elif c == b"#":
                while pos < len(data) and data[pos : pos + 1] not in b"\r\n":
                    pos += 1
            else:
                break
        start = pos
        while pos < len(data) and data[pos : pos + 1] not in b" \t\r\n":
            pos += 1
        if start == pos:
            raise FormatError("truncated image header", f"byte offset {start}")
        return data[start:pos]

    if token() != b"P6":
        raise FormatError("bad image magic, expected P6", "byte offset 0")
    dims = []
    for name in ("width", "height", "maxval"):
        t = token()
        if not t.isdigit():
            raise FormatError(f"bad {name} token {t!r}", f"byte offset {pos - len(t)}")
        dims.append(int(t))
    width, height, maxval = dims
    if width < 1 or height < 1:
        raise ValidationError(f"image dimensions {width}x{height} must be positive")
    if maxval != 255:
        raise FormatError(f"unsupported maxval {maxval}, expected 255")
    pos += 1  # single whitespace byte after maxval
    payload = data[pos:]
    if len(payload) != 3 * width * height:
        raise FormatError(
            f"pixel payload is {len(payload)} bytes, expected {3 * width * height}",
            f"byte offset {pos}",
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3).copy()


def write_ppm(rgb: np.ndarray) -> bytes:
    if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.size == 0:
        raise ValidationError("image must be a non-empty (height, width, 3) array")
    h, w = rgb.shape[:2]
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(rgb, dtype=np.uint8).tobytes()


# ---------------------------------------------------------------------------
# whole-scene input

def read_scene(
    mask_doc: bytes, depth_doc: bytes, rgb_doc: bytes | None = None
) -> SceneInput:
    """Combine the interchange artifacts into one validated SceneInput."""
    width, height, prompt, records = read_masks_json(mask_doc)
    depth = read_depth_dfm(depth_doc)
    if (depth.width, depth.height) != (width, height):
        raise ValidationError(
            f"depth dimensions {depth.width}x{depth.height} do not match "
            f"image {width}x{height}"
        )
    rgb = None
    if rgb_doc is not None:
        rgb = read_ppm(rgb_doc)
        if rgb.shape[:2] != (height, width):
            raise ValidationError(
                f"rgb dimensions {rgb.shape[1]}x{rgb.shape[0]} do not match "
                f"image {width}x{height}"
            )
    return SceneInput(
        width=width,
        height=height,
        instances=records,
        depth=depth,
        rgb=rgb,
        source_prompt=prompt,
    )


# ---------------------------------------------------------------------------
# scene_graph.json

def write_scene_graph(graph: SceneGraph) -> bytes:
    """Serialize a graph to deterministic bytes; write∘read∘write is identity."""
    doc = {
        "instances": [
            {
                "id": k.id,
                "class_label": k.class_label,
                "bbox": list(k.bbox),
                "centroid": list(k.centroid),
                "area_px": k.area_px,
                "area_frac": k.area_frac,
                "mean_depth": k.mean_depth,
                "depth_p05": k.depth_p05,
                "depth_p95": k.depth_p95,
                "color_name": k.color_name,
            }
            for k in graph.instances
        ],
        "relations": [
            {
                "subject_id": e.subject_id,
                "object_id": e.object_id,
                "kind": e.kind.value,
                "strength": e.strength,
                "phrase": e.phrase,
            }
            for e in graph.relations
        ],
        "meta": graph.meta,
    }
    return dumps_canonical(doc, indent=2)


def _as_num(v, path) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise FormatError(f"expected a number, got {v!r}", path)
    return float(v)


def read_scene_graph(data: bytes) -> SceneGraph:
    doc = _parse_json(data)
    raw_instances = _get(doc, "instances", "$")
    raw_relations = _get(doc, "relations", "$")
    meta = _get(doc, "meta", "$")
    if not isinstance(raw_instances, list) or not isinstance(raw_relations, list):
        raise FormatError("instances and relations must be arrays", "$")
    if not isinstance(meta, dict):
        raise FormatError("meta must be an object", "$.meta")

    instances = []
    for i, inst in enumerate(raw_instances):
        path = f"$.instances[{i}]"
        bbox = _get(inst, "bbox", path)
        centroid = _get(inst, "centroid", path)
        if not isinstance(bbox, list) or len(bbox) != 4:
            raise FormatError("bbox must be [x_min, y_min, x_max, y_max]", f"{path}.bbox")
        if not isinstance(centroid, list) or len(centroid) != 2:
            raise FormatError("centroid must be [cx, cy]", f"{path}.centroid")
        instances.append(
            InstanceKnowledge(
                id=_as_int(_get(inst, "id", path), f"{path}.id"),
                class_label=_as_str(_get(inst, "class_label", path), f"{path}.class_label"),
                bbox=tuple(_as_num(v, f"{path}.bbox[{j}]") for j, v in enumerate(bbox)),
                centroid=tuple(_as_num(v, f"{path}.centroid[{j}]") for j, v in enumerate(centroid)),
                area_px=_as_int(_get(inst, "area_px", path), f"{path}.area_px"),
                area_frac=_as_num(_get(inst, "area_frac", path), f"{path}.area_frac"),
                mean_depth=_as_num(_get(inst, "mean_depth", path), f"{path}.mean_depth"),
                depth_p05=_as_num(_get(inst, "depth_p05", path), f"{path}.depth_p05"),
                depth_p95=_as_num(_get(inst, "depth_p95", path), f"{path}.depth_p95"),
                color_name=_as_str(_get(inst, "color_name", path), f"{path}.color_name"),
            )
        )

    relations = []
    for i, rel in enumerate(raw_relations):
        path = f"$.relations[{i}]"
        kind_name = _as_str(_get(rel, "kind", path), f"{path}.kind")
        try:
            kind = RelationKind(kind_name)
        except ValueError:
            raise FormatError(f"unknown relation kind {kind_name!r}", f"{path}.kind") from None
        relations.append(
            RelationEdge(
                subject_id=_as_int(_get(rel, "subject_id", path), f"{path}.subject_id"),
                object_id=_as_int(_get(rel, "object_id", path), f"{path}.object_id"),
                kind=kind,
                strength=_as_num(_get(rel, "strength", path), f"{path}.strength"),
                phrase=_as_str(_get(rel, "phrase", path), f"{path}.phrase"),
            )
        )
    return SceneGraph(instances=instances, relations=relations, meta=meta)
