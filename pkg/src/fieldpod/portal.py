"""Device-hosted HTTP portal.

JSON API (UTF-8, error bodies are {"error": code, "detail": text}):

    GET  /api/networks             scan results, strongest first
    POST /api/network              {"ssid", "passphrase"}   (config mode only)
    GET  /api/network/info         current connection plus neighbors
    GET  /api/application/options  crop and soil choices
    POST /api/application          {"crop","soil","plant_date","area_m2","flow_lph"}
    GET  /api/state                phase, countdown, committed input
    GET  /api/stream               server-sent events, one per topic update
    POST /api/pump                 {"action": "on"|"off"}   (operational only)

Static UI assets are served from the configured directory at "/".
Handlers run on server threads; every mutation is forwarded to the
device's serialized command channel, so the control loop stays the sole
mutator.  Passphrases never appear in responses or logs.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import queue
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from .errors import (
    FieldPodError,
    ModeViolationError,
    NotFoundError,
    UnsupportedKindError,
    ValidationError,
)

log = logging.getLogger(__name__)

STREAM_KEEPALIVE_S = 10.0


class StreamHub:
    """Fan-out of topic updates to any number of event-stream clients."""

    def __init__(self):
        self._lock = threading.Lock()
        self._subscribers: set[queue.Queue] = set()
        self._closed = False

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=256)
        with self._lock:
            self._subscribers.add(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            self._subscribers.discard(q)

    def publish(self, event: dict) -> None:
        with self._lock:
            subscribers = list(self._subscribers)
        for q in subscribers:
            try:
                q.put_nowait(event)
            except queue.Full:
                pass  # slow client: drop rather than stall the device

    def close(self) -> None:
        with self._lock:
            self._closed = True
            subscribers = list(self._subscribers)
            self._subscribers.clear()
        for q in subscribers:
            try:
                q.put_nowait(None)
            except queue.Full:
                pass

    @property
    def closed(self) -> bool:
        return self._closed


class PortalHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "FieldPodPortal/1.0"

    @property
    def backend(self):
        return self.server.backend

    def log_message(self, fmt, *args):  # request bodies stay out of logs
        log.debug("portal: %s", fmt % args)

    # -- plumbing ------------------------------------------------------------

    def _send_json(self, status: int, body: dict) -> None:
        data = json.dumps(body).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _send_error_body(self, status: int, code: str, detail: str) -> None:
        self._send_json(status, {"error": code, "detail": detail})

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b"{}"
        try:
            body = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ValidationError("body", f"invalid JSON: {exc}") from exc
        if not isinstance(body, dict):
            raise ValidationError("body", "expected a JSON object")
        return body

    def _dispatch(self, fn) -> None:
        try:
            fn()
        except ModeViolationError as exc:
            self._send_error_body(403, "config-window-closed", str(exc))
        except NotFoundError as exc:
            self._send_error_body(404, "not-found", str(exc))
        except (ValidationError, UnsupportedKindError) as exc:
            self._send_error_body(400, "validation", str(exc))
        except FieldPodError as exc:
            self._send_error_body(500, "internal", str(exc))
        except (BrokenPipeError, ConnectionResetError):
            pass

    # -- routes ----------------------------------------------------------------

    def do_GET(self):  # noqa: N802 - http.server API
        path = self.path.split("?", 1)[0]
        if path == "/api/networks":
            self._dispatch(lambda: self._send_json(200, {"networks": self.backend.list_networks()}))
        elif path == "/api/network/info":
            self._dispatch(lambda: self._send_json(200, self.backend.network_info()))
        elif path == "/api/application/options":
            self._dispatch(lambda: self._send_json(200, self.backend.application_options()))
        elif path == "/api/state":
            self._dispatch(lambda: self._send_json(200, self.backend.state_view()))
        elif path == "/api/stream":
            self._serve_stream()
        else:
            self._serve_static(path)

    def do_POST(self):  # noqa: N802
        path = self.path.split("?", 1)[0]
        if path == "/api/network":
            self._dispatch(lambda: self._post_network())
        elif path == "/api/application":
            self._dispatch(lambda: self._post_application())
        elif path == "/api/pump":
            self._dispatch(lambda: self._post_pump())
        else:
            self._send_error_body(404, "not-found", f"no such endpoint {path}")

    def _post_network(self):
        body = self._read_json()
        result = self.backend.apply_network(
            ssid=str(body.get("ssid", "")), passphrase=str(body.get("passphrase", ""))
        )
        self._send_json(200, result)

    def _post_application(self):
        body = self._read_json()
        self.backend.submit_application(body)
        self._send_json(200, {"ok": True})

    def _post_pump(self):
        body = self._read_json()
        action = str(body.get("action", ""))
        if action not in ("on", "off"):
            raise ValidationError("action", f'expected "on" or "off", got {action!r}')
        self.backend.pump_command(action)
        self._send_json(200, {"ok": True})

    # -- event stream --------------------------------------------------------

    def _serve_stream(self):
        hub: StreamHub = self.backend.stream_hub
        q = hub.subscribe()
        try:
            self.send_response(200)
            self.send_header("Content-Type", "text/event-stream")
            self.send_header("Cache-Control", "no-cache")
            self.end_headers()
            while not hub.closed:
                try:
                    event = q.get(timeout=STREAM_KEEPALIVE_S)
                except queue.Empty:
                    self.wfile.write(b": keepalive\n\n")
                    self.wfile.flush()
                    continue
                if event is None:
                    break
                data = json.dumps(event).encode("utf-8")
                self.wfile.write(b"data: " + data + b"\n\n")
                self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError, OSError):
            pass
        finally:
            hub.unsubscribe(q)

    # -- static assets ------------------------------------------------------

    def _serve_static(self, path: str):
        ui_dir: Optional[Path] = self.server.ui_dir
        if ui_dir is None:
            self._send_error_body(404, "not-found", "no UI assets configured")
            return
        relative = path.lstrip("/") or "index.html"
        target = (ui_dir / relative).resolve()
        try:
            target.relative_to(ui_dir.resolve())
        except ValueError:
            self._send_error_body(404, "not-found", "outside asset root")
            return
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            self._send_error_body(404, "not-found", f"no asset {relative}")
            return
        content = target.read_bytes()
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(content)))
        self.end_headers()
        self.wfile.write(content)


class PortalServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: tuple[str, int], backend, ui_dir: Optional[Path]):
        super().__init__(address, PortalHandler)
        self.backend = backend
        self.ui_dir = ui_dir


def start_portal(backend, host: str = "127.0.0.1", port: int = 8266, ui_dir=None) -> PortalServer:
    """Bind and serve on a daemon thread; returns the running server."""
    server = PortalServer((host, port), backend, Path(ui_dir) if ui_dir else None)
    thread = threading.Thread(target=server.serve_forever, name="portal-http", daemon=True)
    thread.start()
    return server
