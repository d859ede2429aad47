from __future__ import annotations

import json
import time

import pytest
from fastapi.testclient import TestClient

from mrweb.server import create_app
from mrweb.workspace import Workspace

from helpers import FENCED_PAGE, ScriptedEndpoint, renderer_command
from test_workspace import make_self_generated


@pytest.fixture()
def client(workspace_root):
    ws = Workspace.open(workspace_root, create=True)
    return TestClient(create_app(ws))


@pytest.fixture()
def rated_client(workspace_root):
    for page in ("alpha", "beta"):
        make_self_generated(workspace_root, page)
    ws = Workspace.open(workspace_root, create=True)
    return TestClient(create_app(ws))


VALID_LIST = {
    "origin": "https://alpha.example/",
    "width": 200,
    "height": 150,
    "entries": [
        {
            "position": [[10, 40], [60, 90]],
            "type": "image",
            "url": "https://alpha.example/logo.png",
        }
    ],
}


class TestPages:
    def test_list_pages_with_dimensions(self, client):
        body = client.get("/api/pages").json()
        assert [p["id"] for p in body["pages"]] == ["alpha", "beta", "gamma"]
        alpha = body["pages"][0]
        assert alpha["width"] == 200.0
        assert alpha["height"] == 150.0

    def test_page_image(self, client):
        response = client.get("/api/pages/alpha/image")
        assert response.status_code == 200
        assert response.headers["content-type"] == "image/png"
        assert response.content.startswith(b"\x89PNG")

    def test_unknown_page_404(self, client):
        assert client.get("/api/pages/nope/image").status_code == 404
        assert client.get("/api/pages/nope/resources").status_code == 404


class TestResourcesRoundTrip:
    def test_put_then_get_byte_equal(self, client):
        put = client.put("/api/pages/alpha/resources", json=VALID_LIST)
        assert put.status_code == 200
        first = client.get("/api/pages/alpha/resources").content
        put_again = client.put(
            "/api/pages/alpha/resources", json=json.loads(first.decode("utf-8"))
        )
        assert put_again.status_code == 200
        second = client.get("/api/pages/alpha/resources").content
        assert first == second

    def test_put_invalid_list_is_422_with_violations(self, client):
        bad = dict(VALID_LIST)
        bad["entries"] = [
            {"position": [[60, 40], [10, 90]], "type": "image", "url": "/x.png"}
        ]
        response = client.put("/api/pages/alpha/resources", json=bad)
        assert response.status_code == 422
        violations = response.json()["detail"]["violations"]
        assert violations[0]["code"] == "box-order"

    def test_put_malformed_document_is_422(self, client):
        response = client.put("/api/pages/alpha/resources", json={"width": 1})
        assert response.status_code == 422

    def test_default_empty_list_served_when_missing(self, client, workspace_root):
        (workspace_root / "pages" / "gamma" / "resources.json").unlink()
        body = client.get("/api/pages/gamma/resources").json()
        assert body["entries"] == []
        assert body["width"] == 160


class TestRatings:
    def test_flow_next_post_advance(self, rated_client):
        task = rated_client.get("/api/rating-tasks/next", params={"rater": "r1"}).json()
        assert task["pair"] is not None
        assert task["total"] == 2
        assert task["reference_image"].startswith("/api/pages/")
        assert task["generated_image"].startswith("/api/generated/")

        post = rated_client.post(
            "/api/ratings", json={"rater": "r1", "pair": task["pair"], "score": 5}
        )
        assert post.status_code == 200

        task2 = rated_client.get("/api/rating-tasks/next", params={"rater": "r1"}).json()
        assert task2["pair"] != task["pair"]
        assert task2["completed"] == 1

    def test_images_behind_task_urls_load(self, rated_client):
        task = rated_client.get("/api/rating-tasks/next", params={"rater": "rx"}).json()
        assert rated_client.get(task["reference_image"]).status_code == 200
        assert rated_client.get(task["generated_image"]).status_code == 200

    def test_score_out_of_range_422(self, rated_client):
        response = rated_client.post(
            "/api/ratings", json={"rater": "r1", "pair": "alpha__zero-shot", "score": 7}
        )
        assert response.status_code == 422

    def test_invalid_score_beats_duplicate(self, rated_client):
        body = {"rater": "r9", "pair": "alpha__zero-shot", "score": 2}
        assert rated_client.post("/api/ratings", json=body).status_code == 200
        body["score"] = 9
        assert rated_client.post("/api/ratings", json=body).status_code == 422

    def test_duplicate_rating_409(self, rated_client):
        body = {"rater": "r2", "pair": "alpha__zero-shot", "score": 3}
        assert rated_client.post("/api/ratings", json=body).status_code == 200
        assert rated_client.post("/api/ratings", json=body).status_code == 409

    def test_unknown_pair_404(self, rated_client):
        response = rated_client.post(
            "/api/ratings", json={"rater": "r1", "pair": "nope__zero-shot", "score": 3}
        )
        assert response.status_code == 404

    def test_exclude_skips_locally_queued_pairs(self, rated_client):
        first = rated_client.get(
            "/api/rating-tasks/next", params={"rater": "r4"}
        ).json()
        skipped = rated_client.get(
            "/api/rating-tasks/next", params={"rater": "r4", "exclude": first["pair"]}
        ).json()
        assert skipped["pair"] is not None
        assert skipped["pair"] != first["pair"]

    def test_exhaustion_returns_none_remaining(self, rated_client):
        for _ in range(2):
            task = rated_client.get(
                "/api/rating-tasks/next", params={"rater": "r3"}
            ).json()
            rated_client.post(
                "/api/ratings", json={"rater": "r3", "pair": task["pair"], "score": 4}
            )
        final = rated_client.get("/api/rating-tasks/next", params={"rater": "r3"}).json()
        assert final["pair"] is None
        assert final["completed"] == 2


class TestGenerationJobs:
    def test_job_lifecycle_creates_artifacts(self, workspace_root):
        with ScriptedEndpoint([{"reply": FENCED_PAGE}]) as endpoint:
            config = {
                "endpoint": endpoint.url,
                "model": "stub-model",
                "renderer_command": renderer_command(),
            }
            (workspace_root / "config.json").write_text(json.dumps(config), "utf-8")
            ws = Workspace.open(workspace_root, create=True)
            client = TestClient(create_app(ws))

            started = client.post(
                "/api/pages/alpha/generate", json={"strategy": "zero-shot"}
            )
            assert started.status_code == 200
            job_id = started.json()["job"]

            for _ in range(100):
                status = client.get(f"/api/jobs/{job_id}").json()
                if status["status"] in ("done", "error"):
                    break
                time.sleep(0.05)
            assert status == {"status": "done", "error": None}

        out_dir = workspace_root / "generated" / "alpha" / "zero-shot"
        for artifact in ("page.html", "page.png", "resources.json", "transcript.json"):
            assert (out_dir / artifact).exists(), artifact

    def test_unknown_strategy_422(self, client):
        response = client.post("/api/pages/alpha/generate", json={"strategy": "wild"})
        assert response.status_code == 422

    def test_unknown_job_404(self, client):
        assert client.get("/api/jobs/job-999").status_code == 404

    def test_failed_job_reports_error(self, workspace_root):
        (workspace_root / "config.json").write_text("{}", "utf-8")  # no endpoint
        ws = Workspace.open(workspace_root, create=True)
        client = TestClient(create_app(ws))
        job_id = client.post(
            "/api/pages/alpha/generate", json={"strategy": "zero-shot"}
        ).json()["job"]
        for _ in range(100):
            status = client.get(f"/api/jobs/{job_id}").json()
            if status["status"] in ("done", "error"):
                break
            time.sleep(0.05)
        assert status["status"] == "error"
        assert "endpoint" in status["error"]


class TestResponseShapes:
    def test_documented_schemas(self, rated_client):
        pages = rated_client.get("/api/pages").json()
        assert set(pages) == {"pages"}
        for page in pages["pages"]:
            assert set(page) == {"id", "width", "height"}

        task = rated_client.get("/api/rating-tasks/next", params={"rater": "s"}).json()
        assert {"pair", "completed", "total"} <= set(task)

        put = rated_client.put("/api/pages/alpha/resources", json=VALID_LIST).json()
        assert set(put) == {"ok", "clamped_indices"}
