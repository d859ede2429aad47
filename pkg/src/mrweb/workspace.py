"""Workspace layout, crash-safe persistence, and the page-level workflows.

A workspace is a directory of file-shaped artifacts::

    pages/<id>/{original.html, original.png, resources.json, geometry.json, embedding.json}
    generated/<id>/<strategy>/{page.html, page.png, resources.json, transcript.json}
    reports/            one evaluation report per (page, strategy)
    ratings/<rater>.json
    config.json

All writes go through write-temp-then-rename, so a crash never leaves a
truncated file behind.
"""

from __future__ import annotations

import csv
import io
import json
import os
import random
import re
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Optional

from .evaluation import EvaluationReport, PageArtifacts, evaluate_pair
from .generation import (
    GenerationConfig,
    PromptStrategy,
    generate_page,
    render_page,
)
from .htmlpipe import extract_resources, parse_geometry_dump
from .iqa import RatingRecord
from .raster import EmbeddingVector, RasterImage
from .resources import ResourceList, parse_resource_list, serialize_resource_list


class WorkspaceError(ValueError):
    """A workspace-level precondition failed (unknown page, missing artifact...)."""


class DuplicateRating(ValueError):
    """The same rater already rated this pair."""


PAGE_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")

DEFAULT_CONFIG: dict[str, Any] = {
    "seed": 42,
    "route_prefixes": ["/api"],
    "renderer_command": "",
    "endpoint": "",
    "model": "",
    "credential_env": "MRWEB_API_KEY",
    "temperature": 0.0,
    "max_tokens": 4096,
    "refine_rounds": 1,
    "inflight_cap": 2,
}

SUMMARY_COLUMNS = [
    "page",
    "strategy",
    "mae",
    "psnr",
    "ssim",
    "nemd",
    "clip",
    "rer",
    "position_offset",
    "area_difference",
    "color_difference",
    "text_difference",
    "reference_pixel_count",
    "resource_list_length",
]


def atomic_write_bytes(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def atomic_write_text(path: Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


@dataclass
class Workspace:
    root: Path
    config: dict[str, Any]

    @classmethod
    def open(cls, root: Path | str, create: bool = False) -> "Workspace":
        root = Path(root)
        if not root.exists():
            if not create:
                raise WorkspaceError(f"workspace directory {root} does not exist")
            root.mkdir(parents=True)
        config_path = root / "config.json"
        if config_path.exists():
            config = {**DEFAULT_CONFIG, **json.loads(config_path.read_text("utf-8"))}
        else:
            config = dict(DEFAULT_CONFIG)
            if create:
                atomic_write_text(
                    config_path,
                    json.dumps(DEFAULT_CONFIG, indent=2, ensure_ascii=False) + "\n",
                )
        ws = cls(root=root, config=config)
        if create:
            for sub in ("pages", "generated", "reports", "ratings"):
                (root / sub).mkdir(exist_ok=True)
        return ws

    # --- paths ---

    def page_dir(self, page: str) -> Path:
        if not PAGE_ID_RE.match(page):
            raise WorkspaceError(f"invalid page id {page!r}")
        return self.root / "pages" / page

    def generated_dir(self, page: str, strategy: str) -> Path:
        return self.root / "generated" / page / strategy

    def report_path(self, page: str, strategy: str) -> Path:
        return self.root / "reports" / f"{page}__{strategy}.json"

    def ratings_path(self, rater: str) -> Path:
        safe = re.sub(r"[^A-Za-z0-9._-]", "_", rater) or "_"
        return self.root / "ratings" / f"{safe}.json"

    # --- discovery ---

    def list_pages(self) -> list[str]:
        pages_dir = self.root / "pages"
        if not pages_dir.is_dir():
            return []
        return sorted(
            p.name
            for p in pages_dir.iterdir()
            if p.is_dir() and (p / "original.png").exists() and PAGE_ID_RE.match(p.name)
        )

    def list_generated(self, page: str) -> list[str]:
        base = self.root / "generated" / page
        if not base.is_dir():
            return []
        return sorted(
            d.name for d in base.iterdir() if d.is_dir() and (d / "page.png").exists()
        )

    def require_page(self, page: str) -> Path:
        page_path = self.page_dir(page)
        if not page_path.is_dir() or not (page_path / "original.png").exists():
            raise WorkspaceError(f"unknown page {page!r}")
        return page_path

    # --- generation config ---

    def generation_config(self) -> GenerationConfig:
        return GenerationConfig(
            endpoint=self.config["endpoint"],
            model=self.config["model"],
            temperature=float(self.config["temperature"]),
            seed=int(self.config["seed"]),
            max_tokens=int(self.config["max_tokens"]),
            credential_env=self.config["credential_env"],
            refine_rounds=int(self.config["refine_rounds"]),
        )

    def route_prefixes(self) -> tuple[str, ...]:
        return tuple(self.config["route_prefixes"])


def _load_resources(path: Path) -> ResourceList:
    return parse_resource_list(path.read_text("utf-8"))


def _load_embedding(path: Path) -> Optional[EmbeddingVector]:
    if not path.exists():
        return None
    return EmbeddingVector.from_json(path.read_text("utf-8"))


def run_generation(workspace: Workspace, page: str, strategy_name: str) -> Path:
    """Generate one page under one strategy and persist every artifact.

    Writes page.html, renders page.png plus geometry.json through the
    configured renderer command, extracts the generated resource list against
    the reference origin, and stores the full transcript.
    """
    try:
        strategy = PromptStrategy(strategy_name)
    except ValueError:
        raise WorkspaceError(f"unknown strategy {strategy_name!r}") from None
    page_path = workspace.require_page(page)
    screenshot = (page_path / "original.png").read_bytes()
    resources_path = page_path / "resources.json"
    if not resources_path.exists():
        raise WorkspaceError(f"page {page!r} has no resources.json")
    reference = _load_resources(resources_path)

    config = workspace.generation_config()
    if not config.endpoint:
        raise WorkspaceError("config.json has no chat endpoint configured")
    renderer_command = workspace.config["renderer_command"]
    if not renderer_command:
        raise WorkspaceError("config.json has no renderer_command configured")

    out_dir = workspace.generated_dir(page, strategy.value)
    out_dir.mkdir(parents=True, exist_ok=True)

    def render_intermediate(html: str, round_index: int) -> None:
        draft = out_dir / f"refine_{round_index}.html"
        atomic_write_text(draft, html)
        render_page(
            draft,
            out_dir / f"refine_{round_index}.png",
            out_dir / f"refine_{round_index}.geometry.json",
            renderer_command,
        )

    result = generate_page(
        screenshot_png=screenshot,
        resources=None if strategy == PromptStrategy.SELF_CONTAINED else reference,
        strategy=strategy,
        config=config,
        render_intermediate=render_intermediate,
    )

    html_path = out_dir / "page.html"
    atomic_write_text(html_path, result.html)
    outputs = render_page(
        html_path,
        out_dir / "page.png",
        out_dir / "geometry.json",
        renderer_command,
    )
    dump = parse_geometry_dump(outputs.geometry_path.read_text("utf-8"))
    # resolve generated URLs as if served from the reference origin, so
    # site-relative URLs compare equal during matching
    dump = replace(dump, origin=reference.origin)
    generated_resources = extract_resources(dump, workspace.route_prefixes())
    atomic_write_text(
        out_dir / "resources.json", serialize_resource_list(generated_resources)
    )
    atomic_write_text(out_dir / "transcript.json", result.transcript.to_json())
    return out_dir


def run_evaluation(workspace: Workspace, page: str, strategy: str) -> EvaluationReport:
    """Score one generated page against its reference and persist the report."""
    page_path = workspace.require_page(page)
    gen_dir = workspace.generated_dir(page, strategy)
    if not (gen_dir / "page.png").exists():
        raise WorkspaceError(f"page {page!r} has no generated artifacts for {strategy!r}")

    reference = PageArtifacts(
        image=RasterImage.load(page_path / "original.png"),
        resources=_load_resources(page_path / "resources.json"),
        embedding=_load_embedding(page_path / "embedding.json"),
    )
    generated = PageArtifacts(
        image=RasterImage.load(gen_dir / "page.png"),
        resources=_load_resources(gen_dir / "resources.json"),
        embedding=_load_embedding(gen_dir / "embedding.json"),
    )
    report = evaluate_pair(
        reference,
        generated,
        seed=int(workspace.config["seed"]),
        page=page,
        strategy=strategy,
    )
    atomic_write_text(workspace.report_path(page, strategy), report.to_json())
    return report


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return json.dumps(value)
    return str(value)


def summarize(workspace: Workspace) -> str:
    """Collect all evaluation reports into one CSV (a row per page/strategy)."""
    reports_dir = workspace.root / "reports"
    rows = []
    if reports_dir.is_dir():
        for path in sorted(reports_dir.glob("*.json")):
            doc = json.loads(path.read_text("utf-8"))
            if "visual" not in doc or "fine_grained" not in doc:
                continue
            fg = doc["fine_grained"]
            rows.append(
                [
                    doc.get("page"),
                    doc.get("strategy"),
                    doc["visual"]["mae"],
                    doc["visual"]["psnr"],
                    doc["visual"]["ssim"],
                    doc["visual"]["nemd"],
                    doc["visual"]["clip"],
                    doc["functional"]["rer"],
                    fg["position_offset"]["mean"],
                    fg["area_difference"]["mean"],
                    fg["color_difference"]["mean"],
                    fg["text_difference"]["mean"],
                    doc["covariates"]["reference_pixel_count"],
                    doc["covariates"]["resource_list_length"],
                ]
            )
    rows.sort(key=lambda r: (str(r[0]), str(r[1])))
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    return out.getvalue()


# --- rating streams ---


def rating_pair_ids(workspace: Workspace) -> list[str]:
    """Every (page, strategy) with both screenshots present, as 'page__strategy'."""
    pairs = []
    for page in workspace.list_pages():
        for strategy in workspace.list_generated(page):
            pairs.append(f"{page}__{strategy}")
    return pairs


def split_pair_id(pair_id: str) -> tuple[str, str]:
    page, separator, strategy = pair_id.rpartition("__")
    if not separator or not page:
        raise WorkspaceError(f"malformed pair id {pair_id!r}")
    return page, strategy


def load_rater_records(workspace: Workspace, rater: str) -> list[RatingRecord]:
    path = workspace.ratings_path(rater)
    if not path.exists():
        return []
    data = json.loads(path.read_text("utf-8"))
    return [
        RatingRecord(rater_id=item["rater"], pair_id=item["pair"], score=item["score"])
        for item in data
    ]


def load_all_ratings(workspace: Workspace) -> list[RatingRecord]:
    ratings_dir = workspace.root / "ratings"
    records: list[RatingRecord] = []
    if ratings_dir.is_dir():
        for path in sorted(ratings_dir.glob("*.json")):
            data = json.loads(path.read_text("utf-8"))
            records.extend(
                RatingRecord(
                    rater_id=item["rater"], pair_id=item["pair"], score=item["score"]
                )
                for item in data
            )
    return records


def next_rating_task(
    workspace: Workspace, rater: str, exclude: frozenset[str] = frozenset()
) -> dict[str, Any]:
    """The rater's next unrated pair, from a per-rater seeded shuffle.

    ``exclude`` lets a client skip pairs it has rated locally but not yet
    synced (its offline retry queue).
    """
    pairs = rating_pair_ids(workspace)
    order = list(pairs)
    random.Random(f"{workspace.config['seed']}:{rater}").shuffle(order)
    rated = {record.pair_id for record in load_rater_records(workspace, rater)}
    completed = sum(1 for pid in pairs if pid in rated)
    for pair_id in order:
        if pair_id not in rated and pair_id not in exclude:
            page, strategy = split_pair_id(pair_id)
            return {
                "pair": pair_id,
                "reference_image": f"/api/pages/{page}/image",
                "generated_image": f"/api/generated/{page}/{strategy}/image",
                "completed": completed,
                "total": len(pairs),
            }
    return {"pair": None, "completed": completed, "total": len(pairs)}


def record_rating(workspace: Workspace, rater: str, pair_id: str, score: int) -> None:
    RatingRecord(rater_id=rater, pair_id=pair_id, score=score)  # validates score first
    if pair_id not in set(rating_pair_ids(workspace)):
        raise WorkspaceError(f"unknown pair {pair_id!r}")
    records = load_rater_records(workspace, rater)
    if any(record.pair_id == pair_id for record in records):
        raise DuplicateRating(f"rater {rater!r} already rated {pair_id!r}")
    payload = [
        {"rater": record.rater_id, "pair": record.pair_id, "score": record.score}
        for record in records
    ] + [{"rater": rater, "pair": pair_id, "score": score}]
    atomic_write_text(
        workspace.ratings_path(rater),
        json.dumps(payload, indent=2, ensure_ascii=False) + "\n",
    )
