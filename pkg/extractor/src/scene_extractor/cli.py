"""Command line interface.

One subcommand, extract. Exit codes: 0 success, 2 malformed or
invalid input, 3 file I/O errors, 4 model dependencies unavailable.
Errors print one JSON object to stderr:
{"error": {"type": ..., "message": ...}}.
"""

from __future__ import annotations

import argparse
import json
import sys

from .core import DEFAULT_MIN_AREA, sam_dam_extract, stub_extract
from .errors import FormatError, ModelUnavailableError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scene-extract",
        description="Extract instance masks and depth into scene interchange files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="run extraction over one image")
    p.add_argument("--image", required=True, help="input image path")
    p.add_argument(
        "--mode",
        choices=("sam_dam", "stub"),
        required=True,
        help="model inference or fixture replay",
    )
    p.add_argument("--prompt", default=None, help="optional text prompt naming the target")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--min-area",
        type=int,
        default=DEFAULT_MIN_AREA,
        help="drop instances smaller than this many pixels",
    )
    p.set_defaults(func=_cmd_extract)
    return parser


def _cmd_extract(args: argparse.Namespace) -> int:
    if args.mode == "stub":
        stub_extract(args.image, args.out, min_area=args.min_area)
    else:
        sam_dam_extract(args.image, args.out, prompt=args.prompt, min_area=args.min_area)
    return 0


def _fail(exc: BaseException, code: int) -> int:
    error = {"type": type(exc).__name__, "message": str(exc)}
    print(json.dumps({"error": error}), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FormatError as e:
        return _fail(e, 2)
    except ModelUnavailableError as e:
        return _fail(e, 4)
    except OSError as e:
        return _fail(e, 3)


def entry() -> None:
    sys.exit(main(sys.argv[1:]))
