"""Segmentation and depth extraction emitting scene interchange files."""

from .core import DEFAULT_MIN_AREA, ExtractionResult, sam_dam_extract, stub_extract
from .errors import ExtractorError, FormatError, ModelUnavailableError
from .formats import (
    decode_rle,
    encode_rle,
    foreground_area,
    inverse_to_depth,
    read_depth,
    read_masks,
    write_depth,
    write_masks,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_MIN_AREA",
    "ExtractionResult",
    "ExtractorError",
    "FormatError",
    "ModelUnavailableError",
    "decode_rle",
    "encode_rle",
    "foreground_area",
    "inverse_to_depth",
    "read_depth",
    "read_masks",
    "sam_dam_extract",
    "stub_extract",
    "write_depth",
    "write_masks",
]
