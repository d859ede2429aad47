"""Shared test scaffolding: a scripted chat endpoint and a stub renderer."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path


class ScriptedEndpoint:
    """Local HTTP chat endpoint replaying a scripted list of behaviors.

    Each script item is either {"reply": text} (a well-formed completion),
    {"status": code} (an HTTP error), or {"drop": true} (connection reset).
    When the script runs out, the last item repeats. All received request
    bodies are kept for assertions.
    """

    def __init__(self, script):
        self.script = list(script)
        self.requests: list[dict] = []
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):  # noqa: N802 (http.server API)
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                index = len(outer.requests)
                outer.requests.append(body)
                action = outer.script[min(index, len(outer.script) - 1)]
                if action.get("drop"):
                    self.connection.close()
                    return
                if "status" in action:
                    self.send_response(action["status"])
                    self.end_headers()
                    self.wfile.write(b"{}")
                    return
                payload = {
                    "choices": [{"message": {"content": action["reply"]}}],
                }
                if "extra" in action:
                    payload.update(action["extra"])
                data = json.dumps(payload).encode("utf-8")
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):  # keep test output clean
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}/v1/chat"

    def __enter__(self) -> "ScriptedEndpoint":
        self._thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self._server.shutdown()
        self._server.server_close()


STUB_RENDERER = Path(__file__).parent / "stub_renderer.py"


def renderer_command() -> str:
    import sys

    return f"{sys.executable} {STUB_RENDERER} {{html}} {{png}} {{geometry}}"


FENCED_PAGE = """Here is the page you asked for:

```html
<!DOCTYPE html><html><head><title>Generated</title></head>
<body>
<a href="/about">About us</a>
<img src="/logo.png">
</body></html>
```

Let me know if you need adjustments."""
