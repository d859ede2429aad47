"""Local HTTP service over a workspace: pages, annotations, ratings, jobs.

Single-user desk scale: flat files behind atomic writes, last writer wins per
file. Generation jobs run on a bounded worker pool.
"""

from __future__ import annotations

import itertools
import json
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, HTTPException, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .iqa import RatingFormatError
from .resources import parse_resource_list, serialize_resource_list, validate
from .workspace import (
    DuplicateRating,
    Workspace,
    WorkspaceError,
    atomic_write_text,
    next_rating_task,
    record_rating,
    run_generation,
    split_pair_id,
)


class RatingBody(BaseModel):
    rater: str
    pair: str
    score: int


class GenerateBody(BaseModel):
    strategy: str


class _Jobs:
    def __init__(self, max_workers: int):
        self._executor = ThreadPoolExecutor(max_workers=max_workers)
        self._lock = threading.Lock()
        self._status: dict[str, dict[str, Any]] = {}
        self._counter = itertools.count(1)

    def submit(self, fn, *args) -> str:
        with self._lock:
            job_id = f"job-{next(self._counter)}"
            self._status[job_id] = {"status": "queued", "error": None}

        def run() -> None:
            with self._lock:
                self._status[job_id]["status"] = "running"
            try:
                fn(*args)
            except Exception as exc:  # job errors are reported, not raised
                with self._lock:
                    self._status[job_id] = {"status": "error", "error": str(exc)}
            else:
                with self._lock:
                    self._status[job_id] = {"status": "done", "error": None}

        self._executor.submit(run)
        return job_id

    def get(self, job_id: str) -> Optional[dict[str, Any]]:
        with self._lock:
            status = self._status.get(job_id)
            return dict(status) if status else None


def create_app(workspace: Workspace, ui_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="mrweb workbench")
    jobs = _Jobs(max_workers=int(workspace.config.get("inflight_cap", 2)))

    def page_or_404(page: str) -> Path:
        try:
            return workspace.require_page(page)
        except WorkspaceError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.get("/api/pages")
    def list_pages() -> dict[str, Any]:
        pages = []
        for page in workspace.list_pages():
            page_path = workspace.page_dir(page)
            resources_path = page_path / "resources.json"
            if resources_path.exists():
                resource_list = parse_resource_list(resources_path.read_text("utf-8"))
                width, height = resource_list.width, resource_list.height
            else:
                from .raster import RasterImage

                image = RasterImage.load(page_path / "original.png")
                width, height = image.width, image.height
            pages.append({"id": page, "width": width, "height": height})
        return {"pages": pages}

    @app.get("/api/pages/{page}/image")
    def page_image(page: str) -> Response:
        page_path = page_or_404(page)
        return Response(
            content=(page_path / "original.png").read_bytes(), media_type="image/png"
        )

    @app.get("/api/generated/{page}/{strategy}/image")
    def generated_image(page: str, strategy: str) -> Response:
        page_or_404(page)
        png = workspace.generated_dir(page, strategy) / "page.png"
        if not png.exists():
            raise HTTPException(status_code=404, detail="no generated screenshot")
        return Response(content=png.read_bytes(), media_type="image/png")

    @app.get("/api/pages/{page}/resources")
    def get_resources(page: str) -> Response:
        page_path = page_or_404(page)
        resources_path = page_path / "resources.json"
        if resources_path.exists():
            return Response(
                content=resources_path.read_bytes(), media_type="application/json"
            )
        from .raster import RasterImage

        image = RasterImage.load(page_path / "original.png")
        empty = {
            "origin": f"workspace://{page}",
            "width": image.width,
            "height": image.height,
            "entries": [],
        }
        return Response(
            content=json.dumps(empty, indent=2) + "\n", media_type="application/json"
        )

    @app.put("/api/pages/{page}/resources")
    def put_resources(page: str, body: dict[str, Any]) -> dict[str, Any]:
        page_path = page_or_404(page)
        try:
            resource_list = parse_resource_list(json.dumps(body))
        except ValueError as exc:
            raise HTTPException(
                status_code=422,
                detail={"violations": [{"code": "format", "message": str(exc)}]},
            ) from exc
        report = validate(resource_list)
        if not report.ok:
            raise HTTPException(
                status_code=422,
                detail={
                    "violations": [
                        {
                            "code": v.code,
                            "message": v.message,
                            "entry_index": v.entry_index,
                        }
                        for v in report.violations
                    ]
                },
            )
        atomic_write_text(
            page_path / "resources.json", serialize_resource_list(resource_list)
        )
        return {"ok": True, "clamped_indices": list(report.clamped_indices)}

    @app.get("/api/rating-tasks/next")
    def rating_task(rater: str, exclude: str = "") -> dict[str, Any]:
        excluded = frozenset(p for p in exclude.split(",") if p)
        return next_rating_task(workspace, rater, excluded)

    @app.post("/api/ratings")
    def post_rating(body: RatingBody) -> dict[str, Any]:
        try:
            record_rating(workspace, body.rater, body.pair, body.score)
        except DuplicateRating as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except RatingFormatError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except WorkspaceError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return {"ok": True}

    @app.post("/api/pages/{page}/generate")
    def start_generation(page: str, body: GenerateBody) -> dict[str, Any]:
        page_or_404(page)
        from .generation import PromptStrategy

        try:
            PromptStrategy(body.strategy)
        except ValueError as exc:
            raise HTTPException(
                status_code=422, detail=f"unknown strategy {body.strategy!r}"
            ) from exc
        job_id = jobs.submit(run_generation, workspace, page, body.strategy)
        return {"job": job_id}

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str) -> dict[str, Any]:
        status = jobs.get(job_id)
        if status is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id!r}")
        return status

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


__all__ = ["create_app", "split_pair_id"]
