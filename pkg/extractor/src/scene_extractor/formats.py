"""Twin codecs for the scene interchange files.

Deliberately independent of the downstream engine's implementation:
these readers and writers are built from the written format contracts
alone, so agreement between the two packages checks the contracts
themselves. Masks use COCO-style uncompressed RLE (column-major
counts alternating background/foreground, background first); depth is
the DFM1 raw float32 format, larger meaning farther.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .errors import FormatError

DEPTH_MAGIC = b"DFM1"


# ---------------------------------------------------------------------------
# run-length masks


def encode_rle(mask: np.ndarray) -> list[int]:
    """Column-major run counts for a boolean mask, background first."""
    if mask.ndim != 2 or mask.size == 0:
        raise FormatError("mask must be a non-empty 2-d array")
    flat = np.asarray(mask, dtype=bool).flatten(order="F")
    counts: list[int] = []
    value = False
    run = 0
    for pixel in flat:
        if pixel == value:
            run += 1
        else:
            counts.append(run)
            value = pixel
            run = 1
    counts.append(run)
    return counts


def decode_rle(size: tuple[int, int], counts: list[int]) -> np.ndarray:
    """Boolean mask from run counts; validates totals and signs."""
    height, width = size
    if height < 1 or width < 1:
        raise FormatError(f"bad mask size {height}x{width}")
    if any(c < 0 for c in counts):
        raise FormatError("run counts must be non-negative")
    if sum(counts) != height * width:
        raise FormatError(
            f"run counts sum to {sum(counts)}, expected {height * width}"
        )
    flat = np.empty(height * width, dtype=bool)
    position = 0
    value = False
    for count in counts:
        flat[position : position + count] = value
        position += count
        value = not value
    return flat.reshape((width, height)).T


def foreground_area(counts: list[int]) -> int:
    """Foreground pixel total without decoding (odd-index runs)."""
    return sum(counts[1::2])


# ---------------------------------------------------------------------------
# masks.json


def read_masks(data: bytes) -> dict:
    """Parse and validate a masks document.

    Returns {"width", "height", "prompt", "instances"} where each
    instance is {"id", "class", "score", "size", "counts"}.
    """
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, ValueError) as exc:
        raise FormatError(f"masks file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise FormatError("masks document must be a JSON object")

    image = doc.get("image")
    if not isinstance(image, dict):
        raise FormatError("missing image block")
    width, height = image.get("width"), image.get("height")
    if not (isinstance(width, int) and isinstance(height, int)) or width < 1 or height < 1:
        raise FormatError("image width and height must be positive integers")

    prompt = doc.get("prompt")
    if prompt is not None and not isinstance(prompt, str):
        raise FormatError("prompt must be a string or null")

    raw = doc.get("instances")
    if not isinstance(raw, list):
        raise FormatError("instances must be an array")

    instances = []
    seen: set[int] = set()
    for index, entry in enumerate(raw):
        where = f"instance {index}"
        if not isinstance(entry, dict):
            raise FormatError(f"{where} must be an object")
        ident = entry.get("id")
        if not isinstance(ident, int):
            raise FormatError(f"{where} has a non-integer id")
        if ident in seen:
            raise FormatError(f"duplicate instance id {ident}")
        seen.add(ident)
        label = entry.get("class")
        if not isinstance(label, str) or not label:
            raise FormatError(f"{where} needs a non-empty class")
        score = entry.get("score")
        if score is not None:
            if not isinstance(score, (int, float)) or isinstance(score, bool):
                raise FormatError(f"{where} score must be a number or null")
            if not 0.0 <= float(score) <= 1.0:
                raise FormatError(f"{where} score {score} outside [0, 1]")
        rle = entry.get("rle")
        if not isinstance(rle, dict):
            raise FormatError(f"{where} is missing its rle block")
        size = rle.get("size")
        if (
            not isinstance(size, list)
            or len(size) != 2
            or not all(isinstance(v, int) for v in size)
        ):
            raise FormatError(f"{where} rle size must be [height, width]")
        if size != [height, width]:
            raise FormatError(
                f"{where} rle size {size} disagrees with image {[height, width]}"
            )
        counts = rle.get("counts")
        if not isinstance(counts, list) or not all(
            isinstance(c, int) and not isinstance(c, bool) for c in counts
        ):
            raise FormatError(f"{where} rle counts must be integers")
        if any(c < 0 for c in counts):
            raise FormatError(f"{where} has a negative run count")
        if sum(counts) != height * width:
            raise FormatError(
                f"{where} run counts sum to {sum(counts)}, expected {height * width}"
            )
        if foreground_area(counts) == 0:
            raise FormatError(f"{where} has an empty mask")
        instances.append(
            {
                "id": ident,
                "class": label,
                "score": None if score is None else float(score),
                "size": (height, width),
                "counts": list(counts),
            }
        )
    return {"width": width, "height": height, "prompt": prompt, "instances": instances}


def write_masks(width: int, height: int, prompt: str | None, instances: list[dict]) -> bytes:
    doc = {
        "image": {"width": width, "height": height},
        "prompt": prompt,
        "instances": [
            {
                "id": inst["id"],
                "class": inst["class"],
                "score": inst["score"],
                "rle": {"size": [height, width], "counts": inst["counts"]},
            }
            for inst in instances
        ],
    }
    return (json.dumps(doc, separators=(",", ":"), ensure_ascii=False) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# depth maps


def read_depth(data: bytes) -> tuple[int, int, np.ndarray]:
    """(width, height, float32 row-major grid) from DFM1 bytes."""
    if len(data) < 12 or data[:4] != DEPTH_MAGIC:
        raise FormatError("not a DFM1 depth map")
    width, height = struct.unpack_from("<II", data, 4)
    if width < 1 or height < 1:
        raise FormatError(f"bad depth dimensions {width}x{height}")
    expected = 12 + 4 * width * height
    if len(data) != expected:
        raise FormatError(
            f"depth payload is {len(data)} bytes, expected {expected}"
        )
    values = np.frombuffer(data, dtype="<f4", offset=12).reshape((height, width))
    if not np.isfinite(values).all():
        raise FormatError("depth map contains non-finite values")
    return width, height, values.copy()


def write_depth(values: np.ndarray) -> bytes:
    if values.ndim != 2 or values.size == 0:
        raise FormatError("depth grid must be a non-empty 2-d array")
    if not np.isfinite(values).all():
        raise FormatError("depth grid contains non-finite values")
    height, width = values.shape
    header = DEPTH_MAGIC + struct.pack("<II", width, height)
    return header + np.ascontiguousarray(values, dtype="<f4").tobytes()


def check_ppm(data: bytes) -> None:
    """Light sanity check that bytes look like a binary P6 image."""
    if not data.startswith(b"P6"):
        raise FormatError("not a binary P6 image")


# ---------------------------------------------------------------------------
# depth conventions


def inverse_to_depth(values: np.ndarray) -> np.ndarray:
    """Relative inverse depth (larger = nearer) to normalized depth.

    Output lies in [0, 1] with larger meaning farther, matching the
    engine's convention. A constant input has no usable relief and
    maps to all zeros.
    """
    grid = np.asarray(values, dtype=np.float64)
    if grid.ndim != 2 or grid.size == 0:
        raise FormatError("inverse depth grid must be a non-empty 2-d array")
    if not np.isfinite(grid).all():
        raise FormatError("inverse depth grid contains non-finite values")
    lo = float(grid.min())
    hi = float(grid.max())
    span = hi - lo
    if span <= 0.0:
        return np.zeros(grid.shape, dtype=np.float32)
    return ((hi - grid) / span).astype(np.float32)
