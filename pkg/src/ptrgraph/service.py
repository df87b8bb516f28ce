"""Session-oriented HTTP/JSON API for the simulator.

Stateless-client protocol: every step result carries the full post-state
graph document plus the diff sets, so clients never rewrite graphs locally.
Per-session operations are serialized with a lock (waiters time out into
409); distinct sessions are fully independent. Sessions idle longer than
the TTL are evicted; with a data directory configured they are snapshotted
after every mutation and transparently reloaded on access.

Environment: ``PTRGRAPH_PORT``, ``PTRGRAPH_DATA_DIR``,
``PTRGRAPH_SESSION_TTL_SECS``, ``PTRGRAPH_CORS_ORIGIN``.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
import uuid
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from ptrgraph import __version__
from ptrgraph.errors import PtrGraphError, UnknownRule
from ptrgraph.frontend import parse_declarations
from ptrgraph.io_export import (
    config_from_json,
    graph_digest,
    reports_to_json,
    session_from_json,
    session_to_json,
    session_trace_json,
    to_json,
)
from ptrgraph.model import rule_catalog
from ptrgraph.simulator import (
    Session,
    StepResult,
    apply_what_if,
    model_check,
    new_session,
    step,
    undo,
    what_if_matches,
)

_LOCK_TIMEOUT_SECS = 10.0


@dataclass
class ServiceConfig:
    port: int = 8080
    data_dir: str | None = None
    ui_dir: str | None = None
    session_ttl_secs: float = float(os.environ.get("PTRGRAPH_SESSION_TTL_SECS", 3600))
    cors_origin: str | None = os.environ.get("PTRGRAPH_CORS_ORIGIN", "*")


@dataclass
class SessionRecord:
    session_id: str
    session: Session
    lock: threading.Lock = field(default_factory=threading.Lock)
    created_at: float = field(default_factory=time.monotonic)
    last_touched: float = field(default_factory=time.monotonic)


class SessionStore:
    """In-memory session registry with TTL eviction and JSON snapshots."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self._records: dict[str, SessionRecord] = {}
        self._guard = threading.Lock()

    def _path(self, session_id: str) -> Path | None:
        if not self.config.data_dir:
            return None
        return Path(self.config.data_dir) / f"{session_id}.json"

    def create(self, session: Session) -> SessionRecord:
        record = SessionRecord(uuid.uuid4().hex[:12], session)
        with self._guard:
            self._records[record.session_id] = record
        self.persist(record)
        return record

    def get(self, session_id: str) -> SessionRecord | None:
        with self._guard:
            self._evict_expired()
            record = self._records.get(session_id)
            if record is not None:
                record.last_touched = time.monotonic()
                return record
        path = self._path(session_id)
        if path is not None and path.exists():
            session = session_from_json(json.loads(path.read_text()))
            record = SessionRecord(session_id, session)
            with self._guard:
                self._records.setdefault(session_id, record)
                return self._records[session_id]
        return None

    def persist(self, record: SessionRecord) -> None:
        path = self._path(record.session_id)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(session_to_json(record.session)))

    def _evict_expired(self) -> None:
        ttl = self.config.session_ttl_secs
        if ttl <= 0:
            return
        now = time.monotonic()
        for sid in [
            sid
            for sid, rec in self._records.items()
            if now - rec.last_touched > ttl
        ]:
            del self._records[sid]


class ApiError(Exception):
    def __init__(self, status: int, kind: str, message: str, position=None):
        super().__init__(message)
        self.status = status
        self.body = {"kind": kind, "message": message}
        if position is not None:
            self.body["position"] = position


def _domain_error(exc: PtrGraphError) -> ApiError:
    body = exc.to_dict()
    return ApiError(422, body["kind"], body["message"], body.get("position"))


def _step_result_payload(session: Session, result: StepResult) -> dict:
    graph_doc = to_json(result.graph)
    return {
        "statement": result.step.statement_text,
        "rule": result.rule_name,
        "anchors": dict(result.step.anchors),
        "graph": graph_doc,
        "digest": graph_digest(graph_doc),
        "diff": result.step.diff.to_dict(),
        "reports": reports_to_json(result.reports),
        "output": result.output,
        "transcript": list(session.transcript),
        "stepCount": len(session.history),
    }


def _graph_payload(session: Session) -> dict:
    graph_doc = to_json(session.graph)
    return {
        "graph": graph_doc,
        "digest": graph_digest(graph_doc),
        "reports": reports_to_json(session.check_now()),
        "stepCount": len(session.history),
        "transcript": list(session.transcript),
    }


class Api:
    """Route handlers; transport-independent so tests can call them directly."""

    def __init__(self, store: SessionStore):
        self.store = store

    # every handler returns (status, payload)

    def create_session(self, body: dict) -> tuple[int, dict]:
        decls_field = body.get("decls", "")
        if isinstance(decls_field, str):
            decls = parse_declarations(decls_field)
        else:
            raise ApiError(400, "BadRequest", "decls must be declaration text")
        config = config_from_json(body.get("config", {}))
        session = new_session(decls, config, body.get("inputStream", ()))
        record = self.store.create(session)
        payload = _graph_payload(session)
        payload["sessionId"] = record.session_id
        return 200, payload

    def _record(self, session_id: str) -> SessionRecord:
        record = self.store.get(session_id)
        if record is None:
            raise ApiError(404, "UnknownSession", f"no session {session_id!r}")
        return record

    def _locked(self, record: SessionRecord):
        if not record.lock.acquire(timeout=_LOCK_TIMEOUT_SECS):
            raise ApiError(
                409,
                "Conflict",
                "session is busy with another request; retry",
            )
        return record.lock

    def get_graph(self, session_id: str) -> tuple[int, dict]:
        record = self._record(session_id)
        lock = self._locked(record)
        try:
            return 200, _graph_payload(record.session)
        finally:
            lock.release()

    def post_statement(self, session_id: str, body: dict) -> tuple[int, dict]:
        record = self._record(session_id)
        text = body.get("text")
        if not isinstance(text, str) or not text.strip():
            raise ApiError(400, "BadRequest", "body needs a statement in 'text'")
        lock = self._locked(record)
        try:
            result = step(record.session, text)
            self.store.persist(record)
            return 200, _step_result_payload(record.session, result)
        finally:
            lock.release()

    def get_rules(self, session_id: str) -> tuple[int, dict]:
        self._record(session_id)
        rules = []
        for name, rule in sorted(rule_catalog().items()):
            rules.append(
                {
                    "name": name,
                    "description": rule.description,
                    "extension": name.startswith("ext:"),
                    "anchors": dict(rule.anchors),
                    "params": sorted(rule.params),
                }
            )
        rules.append(
            {
                "name": "pointerArrayAt(k)",
                "description": "bind a null pointer to array element k",
                "extension": False,
                "anchors": {"p": "Pointer", "ar": "Array"},
                "params": [],
            }
        )
        return 200, {"rules": rules}

    def get_matches(self, session_id: str, rule_name: str | None) -> tuple[int, dict]:
        record = self._record(session_id)
        if not rule_name:
            raise ApiError(400, "BadRequest", "query parameter 'rule' is required")
        lock = self._locked(record)
        try:
            matches = what_if_matches(record.session, rule_name)
        finally:
            lock.release()
        return 200, {"rule": rule_name, "matches": [m.to_dict() for m in matches]}

    def post_apply(self, session_id: str, body: dict) -> tuple[int, dict]:
        record = self._record(session_id)
        rule_name = body.get("rule")
        if not isinstance(rule_name, str):
            raise ApiError(400, "BadRequest", "body needs a rule name in 'rule'")
        try:
            match_index = int(body.get("matchIndex", -1))
        except (TypeError, ValueError):
            raise ApiError(400, "BadRequest", "matchIndex must be an integer") from None
        params = body.get("params") or {}
        lock = self._locked(record)
        try:
            result = apply_what_if(record.session, rule_name, match_index, params)
            self.store.persist(record)
            return 200, _step_result_payload(record.session, result)
        finally:
            lock.release()

    def post_undo(self, session_id: str) -> tuple[int, dict]:
        record = self._record(session_id)
        lock = self._locked(record)
        try:
            undo(record.session)
            self.store.persist(record)
            payload = _graph_payload(record.session)
            payload["statement"] = None
            payload["rule"] = None
            payload["diff"] = None
            return 200, payload
        finally:
            lock.release()

    def get_trace(self, session_id: str) -> tuple[int, dict]:
        record = self._record(session_id)
        lock = self._locked(record)
        try:
            return 200, session_trace_json(record.session)
        finally:
            lock.release()

    def post_check(self, session_id: str, body: dict) -> tuple[int, dict]:
        record = self._record(session_id)
        formula = body.get("formula")
        if not isinstance(formula, str):
            raise ApiError(400, "BadRequest", "body needs a formula in 'formula'")
        lock = self._locked(record)
        try:
            verdict = model_check(record.session, formula)
        finally:
            lock.release()
        return 200, verdict.to_dict()


_ROUTES = [
    ("POST", re.compile(r"^/sessions$"), "create"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[0-9a-f]+)/graph$"), "graph"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[0-9a-f]+)/statements$"), "statements"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[0-9a-f]+)/rules$"), "rules"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[0-9a-f]+)/matches$"), "matches"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[0-9a-f]+)/apply$"), "apply"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[0-9a-f]+)/undo$"), "undo"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[0-9a-f]+)/trace$"), "trace"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[0-9a-f]+)/check$"), "check"),
]


def make_handler(api: Api, config: ServiceConfig):
    ui_dir = Path(config.ui_dir).resolve() if config.ui_dir else None

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send(self, status: int, payload: dict | bytes, content_type="application/json") -> None:
            body = (
                payload
                if isinstance(payload, bytes)
                else json.dumps(payload).encode()
            )
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            if config.cors_origin:
                self.send_header("Access-Control-Allow-Origin", config.cors_origin)
                self.send_header(
                    "Access-Control-Allow-Headers", "Content-Type"
                )
                self.send_header(
                    "Access-Control-Allow-Methods", "GET, POST, OPTIONS"
                )
            self.end_headers()
            self.wfile.write(body)

        def do_OPTIONS(self):  # CORS preflight
            self._send(204, b"", "text/plain")

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            if length == 0:
                return {}
            raw = self.rfile.read(length)
            try:
                parsed = json.loads(raw)
            except json.JSONDecodeError:
                raise ApiError(400, "BadRequest", "request body is not valid JSON")
            if not isinstance(parsed, dict):
                raise ApiError(400, "BadRequest", "request body must be an object")
            return parsed

        def _dispatch(self, method: str) -> None:
            parsed = urlparse(self.path)
            path = parsed.path.rstrip("/") or "/"
            try:
                if method == "GET" and path == "/openapi.json":
                    self._send(200, openapi_document())
                    return
                if method == "GET" and path == "/healthz":
                    self._send(200, {"ok": True, "version": __version__})
                    return
                if ui_dir is not None and method == "GET" and (
                    path == "/ui" or path.startswith("/ui/")
                ):
                    self._serve_ui(path)
                    return
                for route_method, pattern, name in _ROUTES:
                    m = pattern.match(path)
                    if not m:
                        continue
                    if method != route_method:
                        raise ApiError(405, "MethodNotAllowed", f"{method} not allowed here")
                    self._invoke(name, m, parsed)
                    return
                raise ApiError(404, "NotFound", f"no route {method} {path}")
            except ApiError as exc:
                self._send(exc.status, exc.body)
            except PtrGraphError as exc:
                err = _domain_error(exc)
                self._send(err.status, err.body)

        def _invoke(self, name: str, m, parsed) -> None:
            sid = m.groupdict().get("sid", "")
            if name == "create":
                status, payload = api.create_session(self._body())
            elif name == "graph":
                status, payload = api.get_graph(sid)
            elif name == "statements":
                status, payload = api.post_statement(sid, self._body())
            elif name == "rules":
                status, payload = api.get_rules(sid)
            elif name == "matches":
                query = parse_qs(parsed.query)
                rule = (query.get("rule") or [None])[0]
                status, payload = api.get_matches(sid, rule)
            elif name == "apply":
                status, payload = api.post_apply(sid, self._body())
            elif name == "undo":
                status, payload = api.post_undo(sid)
            elif name == "trace":
                status, payload = api.get_trace(sid)
            else:
                status, payload = api.post_check(sid, self._body())
            self._send(status, payload)

        def _serve_ui(self, path: str) -> None:
            rel = path[len("/ui") :].lstrip("/") or "index.html"
            target = (ui_dir / rel).resolve()
            if not str(target).startswith(str(ui_dir)) or not target.is_file():
                target = ui_dir / "index.html"
                if not target.is_file():
                    raise ApiError(404, "NotFound", "UI bundle not found")
            content_types = {
                ".html": "text/html",
                ".js": "application/javascript",
                ".css": "text/css",
                ".svg": "image/svg+xml",
                ".json": "application/json",
            }
            ctype = content_types.get(target.suffix, "application/octet-stream")
            self._send(200, target.read_bytes(), ctype)

        def do_GET(self):
            self._dispatch("GET")

        def do_POST(self):
            self._dispatch("POST")

    return Handler


def make_server(config: ServiceConfig) -> ThreadingHTTPServer:
    store = SessionStore(config)
    api = Api(store)
    handler = make_handler(api, config)
    server = ThreadingHTTPServer(("127.0.0.1", config.port), handler)
    server.api = api  # type: ignore[attr-defined]
    return server


def serve_forever(config: ServiceConfig) -> None:  # pragma: no cover - CLI loop
    server = make_server(config)
    host, port = server.server_address
    print(f"ptrgraph service on http://{host}:{port} (ui: {config.ui_dir or 'none'})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()


# -- OpenAPI -----------------------------------------------------------------------


def openapi_document() -> dict:
    """Static OpenAPI 3.0 description of the HTTP API."""
    err = {"description": "domain error", "content": {"application/json": {
        "schema": {"$ref": "#/components/schemas/Error"}}}}

    def op(summary: str, *, body: bool = False, params: list | None = None) -> dict:
        spec: dict = {
            "summary": summary,
            "responses": {"200": {"description": "success"}, "422": err},
        }
        if body:
            spec["requestBody"] = {
                "content": {"application/json": {"schema": {"type": "object"}}}
            }
        if params:
            spec["parameters"] = params
        return spec

    sid = {
        "name": "sessionId",
        "in": "path",
        "required": True,
        "schema": {"type": "string"},
    }
    return {
        "openapi": "3.0.3",
        "info": {
            "title": "ptrgraph service",
            "version": __version__,
            "description": "Session-oriented API over the pointer-graph simulator.",
        },
        "paths": {
            "/sessions": {"post": op("create a session at the start graph", body=True)},
            "/sessions/{sessionId}/graph": {
                "get": op("current graph plus constraint reports", params=[sid])
            },
            "/sessions/{sessionId}/statements": {
                "post": op("execute one statement", body=True, params=[sid])
            },
            "/sessions/{sessionId}/rules": {
                "get": op("catalog rules with descriptions", params=[sid])
            },
            "/sessions/{sessionId}/matches": {
                "get": op(
                    "current matches of a rule",
                    params=[
                        sid,
                        {
                            "name": "rule",
                            "in": "query",
                            "required": True,
                            "schema": {"type": "string"},
                        },
                    ],
                )
            },
            "/sessions/{sessionId}/apply": {
                "post": op("apply the i-th match of a rule", body=True, params=[sid])
            },
            "/sessions/{sessionId}/undo": {
                "post": op("undo the last step", params=[sid])
            },
            "/sessions/{sessionId}/trace": {
                "get": op("full trace with embedded states", params=[sid])
            },
            "/sessions/{sessionId}/check": {
                "post": op("evaluate a G(...) formula over the trace", body=True, params=[sid])
            },
        },
        "components": {
            "schemas": {
                "Error": {
                    "type": "object",
                    "properties": {
                        "kind": {"type": "string"},
                        "message": {"type": "string"},
                        "position": {"type": "object"},
                    },
                    "required": ["kind", "message"],
                }
            }
        },
    }
