"""Symbolic scene understanding from instance masks and monocular depth.

The package turns per-image interchange files (instance masks as
run-length encodings, a dense depth map, optionally the image itself)
into symbolic knowledge: per-instance facts, pairwise spatial relations,
a deterministic scene graph, query answers over that graph, and prompt
text for a language model. A synthesis module generates random scenes
with analytically known graphs for end-to-end verification.
"""

from .analysis import analyze_instance, analyze_scene, classify_color, nearest_rank
from .errors import (
    ConfigError,
    FormatError,
    GenerationError,
    InvalidQueryError,
    SelectorError,
    SymsceneError,
    TransportError,
    ValidationError,
)
from .interchange import (
    DepthMap,
    InstanceRecord,
    SceneInput,
    read_depth_dfm,
    read_masks_json,
    read_ppm,
    read_scene,
    read_scene_graph,
    write_depth_dfm,
    write_masks_json,
    write_ppm,
    write_scene_graph,
)
from .knowledge import (
    COLOR_ANCHORS,
    COLOR_NAMES,
    CONVERSE,
    PHRASES,
    THRESHOLD_NAMES,
    InstanceKnowledge,
    RelationEdge,
    RelationKind,
    SceneGraph,
    Thresholds,
)
from .overlay import draw_overlay
from .query import (
    InstanceRef,
    LlmConfig,
    PromptBundle,
    QueryKind,
    SymbolicQuery,
    answer_query,
    build_prompt,
    format_answer,
    relay_to_llm,
    resolve_selector,
)
from .relations import classify_pair, compose_scene, scene_depth_range, validate_graph
from .rle import RleMask, foreground_count, rle_decode, rle_encode
from .synth import (
    GroundTruth,
    ShapeSpec,
    SplitMix64,
    analytic_relations,
    random_scene,
    read_truth,
    render_scene,
    write_truth,
)

__version__ = "0.1.0"

__all__ = [
    "COLOR_ANCHORS",
    "COLOR_NAMES",
    "CONVERSE",
    "PHRASES",
    "THRESHOLD_NAMES",
    "ConfigError",
    "DepthMap",
    "FormatError",
    "GenerationError",
    "GroundTruth",
    "InstanceKnowledge",
    "InstanceRecord",
    "InstanceRef",
    "InvalidQueryError",
    "LlmConfig",
    "PromptBundle",
    "QueryKind",
    "RelationEdge",
    "RelationKind",
    "RleMask",
    "SceneGraph",
    "SceneInput",
    "SelectorError",
    "ShapeSpec",
    "SplitMix64",
    "SymbolicQuery",
    "SymsceneError",
    "Thresholds",
    "TransportError",
    "ValidationError",
    "analytic_relations",
    "analyze_instance",
    "analyze_scene",
    "answer_query",
    "build_prompt",
    "classify_color",
    "classify_pair",
    "compose_scene",
    "draw_overlay",
    "foreground_count",
    "format_answer",
    "nearest_rank",
    "random_scene",
    "read_depth_dfm",
    "read_masks_json",
    "read_ppm",
    "read_scene",
    "read_scene_graph",
    "read_truth",
    "relay_to_llm",
    "render_scene",
    "resolve_selector",
    "rle_decode",
    "rle_encode",
    "scene_depth_range",
    "validate_graph",
    "write_depth_dfm",
    "write_masks_json",
    "write_ppm",
    "write_scene_graph",
    "write_truth",
]
