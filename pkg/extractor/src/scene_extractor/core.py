"""Extraction modes.

stub: replay a synthesized fixture directory. The image's directory
must carry masks.json, depth.dfm, and a truth.json sidecar proving the
files came from the generator; inputs are validated, the minimum-area
filter applied, and untouched files pass through byte for byte.

sam_dam: run segmentation and depth models over a real image. The
heavy dependencies load lazily and their absence is reported as a
configuration problem, not a crash, so the stub path stays usable on
machines without model weights.
"""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, ModelUnavailableError
from .formats import (
    check_ppm,
    encode_rle,
    foreground_area,
    inverse_to_depth,
    read_depth,
    read_masks,
    write_depth,
    write_masks,
)

DEFAULT_MIN_AREA = 50


@dataclass(frozen=True)
class ExtractionResult:
    out_dir: Path
    instance_count: int
    dropped: int


# ---------------------------------------------------------------------------
# stub mode


def _filter_instances(instances: list[dict], min_area: int) -> tuple[list[dict], int]:
    kept = [i for i in instances if foreground_area(i["counts"]) >= min_area]
    return kept, len(instances) - len(kept)


def stub_extract(image_path: str | Path, out_dir: str | Path, min_area: int = DEFAULT_MIN_AREA) -> ExtractionResult:
    image_path = Path(image_path)
    source_dir = image_path.parent
    out = Path(out_dir)
    if min_area < 0:
        raise FormatError(f"min_area must be non-negative, got {min_area}")

    truth_path = source_dir / "truth.json"
    if not truth_path.is_file():
        raise FormatError(
            "stub mode replays generated fixtures and needs a truth.json "
            f"sidecar next to the image; none found in {source_dir}"
        )
    try:
        truth = json.loads(truth_path.read_text())
    except ValueError as exc:
        raise FormatError(f"truth.json is not valid JSON: {exc}") from None
    if not isinstance(truth, dict) or "instances" not in truth:
        raise FormatError("truth.json does not look like generator output")

    masks_path = source_dir / "masks.json"
    depth_path = source_dir / "depth.dfm"
    for required in (masks_path, depth_path, image_path):
        if not required.is_file():
            raise FormatError(f"missing input file {required}")

    masks_bytes = masks_path.read_bytes()
    depth_bytes = depth_path.read_bytes()
    image_bytes = image_path.read_bytes()

    doc = read_masks(masks_bytes)
    depth_w, depth_h, _ = read_depth(depth_bytes)
    if (depth_w, depth_h) != (doc["width"], doc["height"]):
        raise FormatError(
            f"depth map is {depth_w}x{depth_h} but masks declare "
            f"{doc['width']}x{doc['height']}"
        )
    check_ppm(image_bytes)
    if len(truth["instances"]) != len(doc["instances"]):
        raise FormatError(
            f"truth.json lists {len(truth['instances'])} instances, "
            f"masks.json holds {len(doc['instances'])}"
        )

    kept, dropped = _filter_instances(doc["instances"], min_area)

    out.mkdir(parents=True, exist_ok=True)
    if dropped == 0:
        # nothing changed: pass the originals through untouched
        (out / "masks.json").write_bytes(masks_bytes)
    else:
        (out / "masks.json").write_bytes(
            write_masks(doc["width"], doc["height"], doc["prompt"], kept)
        )
    (out / "depth.dfm").write_bytes(depth_bytes)
    shutil.copyfile(image_path, out / "rgb.ppm")
    return ExtractionResult(out_dir=out, instance_count=len(kept), dropped=dropped)


# ---------------------------------------------------------------------------
# model mode


def _load_model_stack():
    try:
        from PIL import Image
        from transformers import pipeline
    except ImportError as exc:
        raise ModelUnavailableError(
            "model mode needs the transformers and Pillow packages with "
            "downloaded weights (install the [models] extra); "
            f"import failed: {exc}. Use --mode stub for generated fixtures."
        ) from None
    return Image, pipeline


def sam_dam_extract(
    image_path: str | Path,
    out_dir: str | Path,
    prompt: str | None = None,
    min_area: int = DEFAULT_MIN_AREA,
    segmenter: str = "facebook/sam-vit-base",
    depth_model: str = "LiheYoung/depth-anything-small-hf",
) -> ExtractionResult:
    image_path = Path(image_path)
    out = Path(out_dir)
    if min_area < 0:
        raise FormatError(f"min_area must be non-negative, got {min_area}")
    if not image_path.is_file():
        raise FormatError(f"missing input file {image_path}")

    Image, pipeline = _load_model_stack()
    try:
        segment = pipeline("mask-generation", model=segmenter)
        estimate_depth = pipeline("depth-estimation", model=depth_model)
    except Exception as exc:  # model hub/load failures are configuration, not bugs
        raise ModelUnavailableError(
            f"could not load model pipelines ({exc}); check weights and "
            "network access, or use --mode stub"
        ) from None

    image = Image.open(image_path).convert("RGB")
    width, height = image.size

    segmented = segment(image)
    raw_masks = segmented["masks"] if isinstance(segmented, dict) else segmented
    scores = segmented.get("scores") if isinstance(segmented, dict) else None

    label = prompt if prompt else "object"
    candidates = []
    for index, mask in enumerate(raw_masks):
        grid = np.asarray(mask, dtype=bool)
        if grid.shape != (height, width):
            raise FormatError(
                f"segmenter returned a {grid.shape} mask for a "
                f"{height}x{width} image"
            )
        area = int(grid.sum())
        if area < min_area:
            continue
        score = None
        if scores is not None and index < len(scores):
            score = max(0.0, min(1.0, float(scores[index])))
        candidates.append((area, score, grid))
    candidates.sort(key=lambda item: -item[0])

    instances = [
        {
            "id": index,
            "class": label,
            "score": score,
            "size": (height, width),
            "counts": encode_rle(grid),
        }
        for index, (area, score, grid) in enumerate(candidates)
    ]

    predicted = estimate_depth(image)["predicted_depth"]
    inverse = np.asarray(predicted, dtype=np.float64)
    if inverse.ndim == 3:
        inverse = inverse[0]
    if inverse.shape != (height, width):
        # estimators commonly work at their own resolution
        inverse = _resize_bilinear(inverse, height, width)
    depth = inverse_to_depth(inverse)

    out.mkdir(parents=True, exist_ok=True)
    (out / "masks.json").write_bytes(write_masks(width, height, prompt, instances))
    (out / "depth.dfm").write_bytes(write_depth(depth))
    dropped = len(raw_masks) - len(instances)
    return ExtractionResult(out_dir=out, instance_count=len(instances), dropped=dropped)


def _resize_bilinear(grid: np.ndarray, height: int, width: int) -> np.ndarray:
    """Separable bilinear resample onto the image grid."""
    src_h, src_w = grid.shape
    rows = np.linspace(0.0, src_h - 1.0, height)
    cols = np.linspace(0.0, src_w - 1.0, width)
    r0 = np.clip(rows.astype(int), 0, src_h - 2) if src_h > 1 else np.zeros(height, int)
    c0 = np.clip(cols.astype(int), 0, src_w - 2) if src_w > 1 else np.zeros(width, int)
    fr = (rows - r0)[:, None] if src_h > 1 else np.zeros((height, 1))
    fc = (cols - c0)[None, :] if src_w > 1 else np.zeros((1, width))
    r1 = np.minimum(r0 + 1, src_h - 1)
    c1 = np.minimum(c0 + 1, src_w - 1)
    top = grid[np.ix_(r0, c0)] * (1 - fc) + grid[np.ix_(r0, c1)] * fc
    bottom = grid[np.ix_(r1, c0)] * (1 - fc) + grid[np.ix_(r1, c1)] * fc
    return top * (1 - fr) + bottom * fr
