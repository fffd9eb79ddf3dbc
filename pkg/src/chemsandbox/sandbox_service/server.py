"""HTTP and stdio transports over one ``SandboxService``."""

from __future__ import annotations

import json
import sys
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import IO
from urllib.parse import parse_qs, urlparse

from .. import canonjson
from ..errors import SchemaViolation, UnknownSession
from .service import SandboxService, ToolResult

MAX_BODY = 1 << 20


def _handler_for(service: SandboxService):
    class Handler(BaseHTTPRequestHandler):
        server_version = "chemsandbox/0.1"

        def log_message(self, format, *args):  # noqa: A002 - quiet by default
            pass

        def _send(self, status: int, payload) -> None:
            body = canonjson.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self) -> None:  # noqa: N802
            url = urlparse(self.path)
            if url.path == "/tools":
                self._send(200, service.list_tools())
            elif url.path == "/trace":
                session = parse_qs(url.query).get("session", ["default"])[0]
                try:
                    self._send(200, [r.to_dict() for r in service.export_trace(session)])
                except UnknownSession as exc:
                    self._send(404, {"error": exc.to_dict()})
            else:
                self._send(404, {"error": {"code": "not_found", "message": url.path}})

        def do_POST(self) -> None:  # noqa: N802
            if urlparse(self.path).path != "/invoke":
                self._send(404, {"error": {"code": "not_found", "message": self.path}})
                return
            length = int(self.headers.get("Content-Length") or 0)
            if length > MAX_BODY:
                self._send(413, {"error": {"code": "too_large", "message": "request body too large"}})
                return
            session = self.headers.get("X-Session", "default")
            try:
                payload = json.loads(self.rfile.read(length) or b"null")
            except json.JSONDecodeError as exc:
                err = SchemaViolation(f"body is not JSON: {exc.msg}", path="$")
                self._send(200, ToolResult("", False, error=err.to_dict()).to_dict())
                return
            # domain failures travel in the body with HTTP 200
            self._send(200, service.invoke(payload, session=session).to_dict())

    return Handler


def make_server(service: SandboxService | None = None, host: str = "127.0.0.1", port: int = 8765) -> ThreadingHTTPServer:
    server = ThreadingHTTPServer((host, port), _handler_for(service or SandboxService()))
    server.daemon_threads = True
    return server


def serve_stdio(service: SandboxService, stdin: IO[str] | None = None, stdout: IO[str] | None = None, session: str = "stdio") -> int:
    """One JSON call per input line, one result per output line."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    for line in stdin:
        if not line.strip():
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            result = ToolResult("", False, error=SchemaViolation(f"line is not JSON: {exc.msg}", path="$").to_dict())
        else:
            result = service.invoke(payload, session=session)
        stdout.write(result.to_json() + "\n")
        stdout.flush()
    return 0
