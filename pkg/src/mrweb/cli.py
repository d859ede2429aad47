"""Command-line entry point tying the workbench together.

Exit codes: 0 on success, 1 on a domain error, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .htmlpipe import (
    extract_resources,
    insert_links,
    parse_geometry_dump,
    parse_html,
    replace_images,
    serialize_html,
    simplify_html,
)
from .iqa import alignment_report, load_metric_scores, load_ratings
from .resources import serialize_resource_list
from .workspace import Workspace, atomic_write_text, run_evaluation, run_generation, summarize


def _read_lines(path: Path) -> list[str]:
    return [line.strip() for line in path.read_text("utf-8").splitlines() if line.strip()]


def _write_or_print(text: str, out: Optional[str]) -> None:
    if out:
        atomic_write_text(Path(out), text)
    else:
        sys.stdout.write(text)


def _cmd_simplify(args: argparse.Namespace) -> int:
    doc = parse_html(Path(args.input).read_text("utf-8"))
    _write_or_print(serialize_html(simplify_html(doc)), args.output)
    return 0


def _cmd_synth_links(args: argparse.Namespace) -> int:
    doc = parse_html(Path(args.input).read_text("utf-8"))
    pool = _read_lines(Path(args.urls))
    _write_or_print(serialize_html(insert_links(doc, pool, args.seed)), args.output)
    return 0


def _cmd_synth_images(args: argparse.Namespace) -> int:
    doc = parse_html(Path(args.input).read_text("utf-8"))
    image_map = _read_lines(Path(args.images))
    result = replace_images(doc, image_map, args.seed)
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    _write_or_print(serialize_html(result.document), args.output)
    return 0


def _cmd_extract(args: argparse.Namespace) -> int:
    dump = parse_geometry_dump(Path(args.dump).read_text("utf-8"))
    prefixes = tuple(args.route_prefix) if args.route_prefix else ("/api",)
    _write_or_print(
        serialize_resource_list(extract_resources(dump, prefixes)), args.output
    )
    return 0


def _cmd_generate(args: argparse.Namespace) -> int:
    workspace = Workspace.open(args.workspace, create=True)
    out_dir = run_generation(workspace, args.page, args.strategy)
    print(f"generated artifacts in {out_dir}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    workspace = Workspace.open(args.workspace, create=True)
    workspace.require_page(args.page)
    strategies = (
        [args.strategy] if args.strategy else workspace.list_generated(args.page)
    )
    if not strategies:
        print(f"error: no generated artifacts for page {args.page!r}", file=sys.stderr)
        return 1
    for strategy in strategies:
        report = run_evaluation(workspace, args.page, strategy)
        print(f"wrote {workspace.report_path(args.page, strategy)}")
        rer = report.fine_grained.rer
        rer_text = "undefined" if rer is None else f"{rer:.4f}"
        print(
            f"  mae={report.visual['mae']:.4f} nemd={report.visual['nemd']:.4f} "
            f"rer={rer_text}"
        )
    return 0


def _cmd_summarize(args: argparse.Namespace) -> int:
    workspace = Workspace.open(args.workspace, create=True)
    csv_text = summarize(workspace)
    if args.output:
        atomic_write_text(Path(args.output), csv_text)
        print(f"wrote {args.output}")
    else:
        sys.stdout.write(csv_text)
    return 0


def _parse_scores_arg(raw: str) -> tuple[str, Path]:
    if "=" in raw:
        name, _, path = raw.partition("=")
        return name, Path(path)
    path = Path(raw)
    return path.stem, path


def _cmd_iqa(args: argparse.Namespace) -> int:
    ratings = load_ratings(Path(args.ratings).read_text("utf-8"))
    metric_scores = {}
    for raw in args.scores:
        name, path = _parse_scores_arg(raw)
        metric_scores[name] = load_metric_scores(path.read_text("utf-8"))
    report = alignment_report(metric_scores, ratings)
    sys.stdout.write(report.to_table())
    if args.out:
        atomic_write_text(Path(args.out), report.to_json())
        print(f"wrote {args.out}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    workspace = Workspace.open(args.workspace, create=True)
    ui_dir = Path(args.ui) if args.ui else None
    app = create_app(workspace, ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrweb",
        description="Workbench for resource-aware webpage generation and evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simplify", help="strip invisible noise from an HTML file")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_simplify)

    p = sub.add_parser("synth-links", help="assign pool URLs to every anchor")
    p.add_argument("input")
    p.add_argument("--urls", required=True, help="newline-delimited URL pool file")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_synth_links)

    p = sub.add_parser("synth-images", help="swap img/background URLs for map entries")
    p.add_argument("input")
    p.add_argument("--images", required=True, help="newline-delimited image URL file")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_synth_images)

    p = sub.add_parser("extract", help="turn a geometry dump into a resource list")
    p.add_argument("dump")
    p.add_argument("--route-prefix", action="append", default=None)
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_extract)

    p = sub.add_parser("generate", help="generate a page with a prompting strategy")
    p.add_argument("--page", required=True)
    p.add_argument("--strategy", required=True)
    p.add_argument("--workspace", default=".")
    p.set_defaults(fn=_cmd_generate)

    p = sub.add_parser("evaluate", help="score generated pages against references")
    p.add_argument("--page", required=True)
    p.add_argument("--strategy")
    p.add_argument("--workspace", default=".")
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("summarize", help="collect all reports into one CSV")
    p.add_argument("--workspace", default=".")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_summarize)

    p = sub.add_parser("iqa", help="align metric scores with human ratings")
    p.add_argument("--ratings", required=True)
    p.add_argument(
        "--scores",
        action="append",
        required=True,
        help="metric scores file, optionally NAME=PATH; repeatable",
    )
    p.add_argument("--out", help="also write the report as JSON")
    p.set_defaults(fn=_cmd_iqa)

    p = sub.add_parser("serve", help="serve the workspace HTTP API")
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--workspace", default=".")
    p.add_argument("--ui", help="static frontend directory to mount at /")
    p.set_defaults(fn=_cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, RuntimeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
