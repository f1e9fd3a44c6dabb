"""Command line interface.

Subcommands: analyze (scene inputs -> scene graph), query (graph ->
answer), prompt (graph -> LLM prompt text, optionally relayed), overlay
(graph drawn onto the image), synth (generated scene written to a
directory).

Exit codes: 0 success, 1 bad query usage, 2 malformed or invalid input
(including bad thresholds and generation failures), 3 file I/O errors,
4 unresolvable instance references, 5 LLM configuration or transport
failures. Errors print one JSON object to stderr:
{"error": {"type": ..., "message": ...}}.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import (
    ConfigError,
    FormatError,
    GenerationError,
    InvalidQueryError,
    SelectorError,
    TransportError,
    ValidationError,
)
from .interchange import (
    read_scene,
    read_scene_graph,
    write_depth_dfm,
    write_masks_json,
    write_ppm,
    write_scene_graph,
)
from .knowledge import THRESHOLD_NAMES, Thresholds
from .overlay import draw_overlay
from .query import (
    InstanceRef,
    QueryKind,
    SymbolicQuery,
    answer_query,
    build_prompt,
    format_answer,
    relay_to_llm,
)
from .relations import compose_scene, validate_graph
from .synth import random_scene, write_truth


def _read_file(path: str) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def _write_file(path: str, data: bytes) -> None:
    with open(path, "wb") as f:
        f.write(data)


def _emit(data: bytes, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        _write_file(out_path, data)


# ---------------------------------------------------------------------------
# shared flags


def _add_threshold_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("thresholds")
    for name in THRESHOLD_NAMES:
        group.add_argument(
            f"--{name.replace('_', '-')}", type=float, default=None, dest=name
        )
    group.add_argument(
        "--config",
        default=None,
        help="JSON file of threshold overrides; explicit flags win",
    )


def _thresholds_from(args: argparse.Namespace) -> Thresholds:
    values: dict[str, float] = {}
    if args.config is not None:
        try:
            doc = json.loads(_read_file(args.config).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise FormatError(f"config is not valid JSON: {e}") from e
        if not isinstance(doc, dict):
            raise FormatError("config must be a JSON object")
        for key, value in doc.items():
            if key not in THRESHOLD_NAMES:
                raise ValidationError(f"unknown threshold {key!r} in config")
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError(f"threshold {key!r} must be a number")
            values[key] = float(value)
    for name in THRESHOLD_NAMES:
        flag = getattr(args, name)
        if flag is not None:
            values[name] = flag
    return Thresholds(**values)


def _add_scene_flags(parser: argparse.ArgumentParser, rgb_help: str) -> None:
    parser.add_argument("--masks", required=True, help="instance masks JSON")
    parser.add_argument("--depth", required=True, help="depth map (DFM1)")
    parser.add_argument("--rgb", default=None, help=rgb_help)
    parser.add_argument(
        "--depth-invert",
        action="store_true",
        help="flip depth so larger input values become nearer",
    )
    parser.add_argument(
        "--depth-stat",
        choices=("mean", "median"),
        default="mean",
        help="central depth statistic per instance",
    )


def _load_scene(args: argparse.Namespace):
    mask_doc = _read_file(args.masks)
    depth_doc = _read_file(args.depth)
    rgb_doc = _read_file(args.rgb) if args.rgb else None
    scene = read_scene(mask_doc, depth_doc, rgb_doc)
    if args.depth_invert:
        values = scene.depth.values
        scene.depth.values = (values.max() + values.min()) - values
    return scene


def _ref(value: str | None) -> InstanceRef | None:
    """Parse 'class' or 'class:ordinal'."""
    if value is None:
        return None
    label, sep, ordinal = value.rpartition(":")
    if not sep:
        return InstanceRef(class_label=value)
    try:
        return InstanceRef(class_label=label, ordinal=int(ordinal))
    except ValueError:
        raise InvalidQueryError(
            f"bad reference {value!r}: expected 'class' or 'class:ordinal'"
        ) from None


def _add_query_flags(parser: argparse.ArgumentParser, kind_required: bool) -> None:
    parser.add_argument(
        "--kind",
        choices=tuple(k.value for k in QueryKind),
        required=kind_required,
        default=None if kind_required else QueryKind.COUNT.value,
    )
    parser.add_argument("--class", dest="class_filter", default=None)
    parser.add_argument("--color", dest="color_filter", default=None)
    parser.add_argument("--subject", default=None, help="reference: class[:ordinal]")
    parser.add_argument("--object", dest="object_ref", default=None)
    parser.add_argument("--attribute", default=None)


def _query_from(args: argparse.Namespace) -> SymbolicQuery:
    return SymbolicQuery(
        kind=QueryKind(args.kind),
        class_filter=args.class_filter,
        color_filter=args.color_filter,
        subject_ref=_ref(args.subject),
        object_ref=_ref(args.object_ref),
        attribute=args.attribute,
    )


# ---------------------------------------------------------------------------
# subcommands


def _cmd_analyze(args: argparse.Namespace) -> int:
    thresholds = _thresholds_from(args)
    scene = _load_scene(args)
    graph = compose_scene(scene, thresholds, depth_stat=args.depth_stat)
    validate_graph(graph)
    _emit(write_scene_graph(graph), args.out)
    return 0


def _cmd_query(args: argparse.Namespace) -> int:
    graph = read_scene_graph(_read_file(args.graph))
    answer = answer_query(graph, _query_from(args))
    print(format_answer(answer))
    return 0


def _cmd_prompt(args: argparse.Namespace) -> int:
    graph = read_scene_graph(_read_file(args.graph))
    focus = None
    if any((args.class_filter, args.color_filter, args.subject, args.object_ref)):
        focus = _query_from(args)
    bundle = build_prompt(graph, args.question, focus)
    text = bundle.text
    if args.send:
        reply = relay_to_llm(bundle)
        text = f"{text}\n---\n{reply}"
    _emit(text.encode("utf-8") + b"\n", args.out)
    return 0


def _cmd_overlay(args: argparse.Namespace) -> int:
    if args.rgb is None:
        raise ValidationError("overlay requires --rgb")
    thresholds = _thresholds_from(args)
    scene = _load_scene(args)
    graph = compose_scene(scene, thresholds, depth_stat=args.depth_stat)
    image = draw_overlay(scene.rgb, graph)
    _emit(write_ppm(image), args.out)
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    scene, truth = random_scene(
        args.seed, args.shapes, args.margin, (args.width, args.height)
    )
    os.makedirs(args.out, exist_ok=True)
    _write_file(
        os.path.join(args.out, "masks.json"),
        write_masks_json(scene.width, scene.height, scene.source_prompt, scene.instances),
    )
    _write_file(os.path.join(args.out, "depth.dfm"), write_depth_dfm(scene.depth.values))
    _write_file(os.path.join(args.out, "rgb.ppm"), write_ppm(scene.rgb))
    _write_file(os.path.join(args.out, "truth.json"), write_truth(truth))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symscene",
        description="Symbolic scene understanding from masks and depth.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="build a scene graph from masks and depth")
    _add_scene_flags(p, rgb_help="optional image for color naming")
    _add_threshold_flags(p)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("query", help="answer a symbolic query against a graph")
    p.add_argument("--graph", required=True)
    _add_query_flags(p, kind_required=True)
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("prompt", help="render graph knowledge into an LLM prompt")
    p.add_argument("--graph", required=True)
    p.add_argument("--question", required=True)
    _add_query_flags(p, kind_required=False)
    p.add_argument("--send", action="store_true", help="relay the prompt and append the reply")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_prompt)

    p = sub.add_parser("overlay", help="draw the scene graph onto the image")
    _add_scene_flags(p, rgb_help="image to draw on (required)")
    _add_threshold_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_overlay)

    p = sub.add_parser("synth", help="generate a synthetic scene with ground truth")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--shapes", type=int, required=True)
    p.add_argument("--margin", type=float, default=2.0)
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_synth)

    return parser


def _fail(exc: BaseException, code: int) -> int:
    error: dict = {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, TransportError) and exc.status is not None:
        error["status"] = exc.status
    print(json.dumps({"error": error}), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidQueryError as e:
        return _fail(e, 1)
    except (FormatError, ValidationError, GenerationError) as e:
        return _fail(e, 2)
    except SelectorError as e:
        return _fail(e, 4)
    except (ConfigError, TransportError) as e:
        return _fail(e, 5)
    except OSError as e:
        return _fail(e, 3)


def entry() -> None:
    sys.exit(main(sys.argv[1:]))
