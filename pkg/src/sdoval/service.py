"""HTTP API: vocabulary queries, domain/rule-set persistence, validation.

File-backed store (one canonical JSON document per domain / rule set, written
atomically); the vocabulary snapshot and function registry are loaded once and
shared read-only across requests.
"""

from __future__ import annotations

import ipaddress
import json
import os
import socket
import tempfile
import threading
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any
from urllib.parse import urlparse

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from sdoval import default_snapshot_path
from sdoval.annotation import (
    FetchError,
    HttpError,
    block_to_json,
    extract_from_html,
    fetch_page,
)
from sdoval.completeness import InvalidDomain
from sdoval.domain import (
    DomainError,
    check_domain,
    parse_domain_spec,
    serialize_domain_spec,
)
from sdoval.pipeline import InvalidRuleSet, render_report, validate
from sdoval.ruleengine import CallingCodeTable, FunctionRegistry
from sdoval.rulelang import RuleError, parse_rule_set, serialize_rule_set
from sdoval.vocabulary import VocabularySnapshot

_ID_RE = re.compile(r"^[a-z0-9][a-z0-9-]{0,63}$")

_EXTRACT_TIMEOUT = 10.0
_EXTRACT_MAX_BYTES = 2 * 1024 * 1024


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    store_root: str = "./store"
    snapshot_path: str | None = None
    calling_code_path: str | None = None
    cors_origin: str = "*"
    allow_local_urls: bool = False
    static_dir: str | None = None


class Store:
    """Domains and rule sets as canonical JSON files, one per id.

    Writes go to a temp file in the same directory and are renamed into
    place, so readers never observe partial documents. Writes to one id are
    serialized.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "domains").mkdir(parents=True, exist_ok=True)
        (self.root / "rules").mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock(self, doc_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(doc_id, threading.Lock())

    @staticmethod
    def valid_id(doc_id: str) -> bool:
        return bool(_ID_RE.match(doc_id))

    def _path(self, kind: str, doc_id: str) -> Path:
        return self.root / kind / f"{doc_id}.json"

    def _write(self, kind: str, doc_id: str, data: bytes) -> None:
        target = self._path(kind, doc_id)
        with self._lock(doc_id):
            fd, tmp = tempfile.mkstemp(dir=target.parent, suffix=".tmp")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(data)
                    fh.flush()
                    os.fsync(fh.fileno())
                os.replace(tmp, target)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise

    def _read(self, kind: str, doc_id: str) -> bytes | None:
        try:
            return self._path(kind, doc_id).read_bytes()
        except FileNotFoundError:
            return None

    def save_domain(self, doc_id: str, data: bytes) -> None:
        self._write("domains", doc_id, data)

    def load_domain(self, doc_id: str) -> bytes | None:
        return self._read("domains", doc_id)

    def delete_domain(self, doc_id: str) -> bool:
        with self._lock(doc_id):
            existed = False
            for kind in ("domains", "rules"):
                path = self._path(kind, doc_id)
                if path.exists():
                    path.unlink()
                    existed = existed or kind == "domains"
            return existed

    def list_domain_ids(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "domains").glob("*.json"))

    def save_rules(self, doc_id: str, data: bytes) -> None:
        self._write("rules", doc_id, data)

    def load_rules(self, doc_id: str) -> bytes | None:
        return self._read("rules", doc_id)


def _error(status: int, code: str, message: str, details=None) -> JSONResponse:
    body: dict = {"error": {"code": code, "message": message}}
    if details is not None:
        body["error"]["details"] = details
    return JSONResponse(body, status_code=status)


def _is_local_target(url: str) -> bool:
    host = urlparse(url).hostname
    if host is None:
        return True
    if host.lower() == "localhost":
        return True
    try:
        addresses = {info[4][0] for info in socket.getaddrinfo(host, None)}
    except OSError:
        return False  # unresolvable: let the fetch fail with NetworkError
    for address in addresses:
        try:
            ip = ipaddress.ip_address(address)
        except ValueError:
            continue
        if ip.is_loopback or ip.is_link_local:
            return True
    return False


def create_app(config: ServiceConfig) -> FastAPI:
    snapshot_file = config.snapshot_path or default_snapshot_path()
    snapshot = VocabularySnapshot.from_json_bytes(Path(snapshot_file).read_bytes())
    table = (
        CallingCodeTable.load(config.calling_code_path)
        if config.calling_code_path
        else CallingCodeTable.default()
    )
    registry = FunctionRegistry(table)
    store = Store(config.store_root)

    app = FastAPI(title="sdoval", docs_url=None, redoc_url=None)
    app.state.snapshot = snapshot
    app.state.registry = registry
    app.state.store = store
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[config.cors_origin] if config.cors_origin != "*" else ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/api/health")
    def health():
        return {"status": "ok", "vocabularyVersion": snapshot.version}

    @app.get("/api/vocabulary/classes")
    def list_classes(query: str = ""):
        needle = query.lower()
        out = [
            {"name": cls.name, "parents": list(cls.parents)}
            for name, cls in sorted(snapshot.classes.items())
            if needle in name.lower()
        ]
        return out

    @app.get("/api/vocabulary/classes/{name}")
    def class_detail(name: str):
        if not snapshot.has_class(name):
            return _error(404, "UnknownClass", f"no vocabulary class named {name!r}")
        ancestors = snapshot.ancestors(name)
        lineage = (name, *ancestors)
        properties = []
        for prop in snapshot.properties_of(name):
            inherited_from = next(c for c in lineage if c in prop.domains)
            properties.append(
                {
                    "name": prop.name,
                    "ranges": list(prop.ranges),
                    "inheritedFrom": inherited_from,
                }
            )
        return {
            "name": name,
            "parents": list(snapshot.classes[name].parents),
            "ancestors": list(ancestors),
            "properties": properties,
        }

    def _load_spec_or_error(domain_id: str):
        if not Store.valid_id(domain_id):
            return None, _error(400, "BadId", "ids are lowercase alphanumerics and hyphens")
        data = store.load_domain(domain_id)
        if data is None:
            return None, _error(404, "UnknownDomain", f"no domain named {domain_id!r}")
        return parse_domain_spec(data), None

    def _store_domain(body: bytes, domain_id: str | None):
        try:
            spec = parse_domain_spec(body)
        except DomainError as exc:
            return _error(422, type(exc).__name__, str(exc))
        if domain_id is not None and spec.id != domain_id:
            return _error(422, "IdMismatch", f"body id {spec.id!r} != path id {domain_id!r}")
        if not Store.valid_id(spec.id):
            return _error(422, "BadId", "ids are lowercase alphanumerics and hyphens")
        issues = check_domain(spec, snapshot)
        if issues:
            return _error(
                422,
                "DomainIssues",
                f"{len(issues)} issue(s) against vocabulary {snapshot.version}",
                details=[issue.to_json() for issue in issues],
            )
        data = serialize_domain_spec(spec)
        store.save_domain(spec.id, data)
        return Response(content=data, media_type="application/json")

    @app.get("/api/domains")
    def list_domains():
        out = []
        for domain_id in store.list_domain_ids():
            data = store.load_domain(domain_id)
            if data is None:
                continue
            doc = json.loads(data)
            out.append(
                {
                    "id": doc["id"],
                    "name": doc["name"],
                    "version": doc["version"],
                    "targets": doc["targets"],
                    "hasRules": store.load_rules(domain_id) is not None,
                }
            )
        return out

    @app.post("/api/domains")
    async def create_domain(request: Request):
        return _store_domain(await request.body(), None)

    @app.get("/api/domains/{domain_id}")
    def get_domain(domain_id: str):
        data = store.load_domain(domain_id) if Store.valid_id(domain_id) else None
        if data is None:
            return _error(404, "UnknownDomain", f"no domain named {domain_id!r}")
        return Response(content=data, media_type="application/json")

    @app.put("/api/domains/{domain_id}")
    async def put_domain(domain_id: str, request: Request):
        return _store_domain(await request.body(), domain_id)

    @app.delete("/api/domains/{domain_id}")
    def delete_domain(domain_id: str):
        if not Store.valid_id(domain_id) or not store.delete_domain(domain_id):
            return _error(404, "UnknownDomain", f"no domain named {domain_id!r}")
        return Response(status_code=204)

    @app.get("/api/domains/{domain_id}/rules")
    def get_rules(domain_id: str):
        spec, err = _load_spec_or_error(domain_id)
        if err is not None:
            return err
        data = store.load_rules(domain_id)
        if data is None:
            return _error(404, "UnknownRuleSet", f"domain {domain_id!r} has no rule set")
        return Response(content=data, media_type="application/json")

    @app.put("/api/domains/{domain_id}/rules")
    async def put_rules(domain_id: str, request: Request):
        spec, err = _load_spec_or_error(domain_id)
        if err is not None:
            return err
        body = await request.body()
        try:
            rule_set = parse_rule_set(body, spec, snapshot, registry.manifest)
        except (RuleError, DomainError) as exc:
            return _error(422, type(exc).__name__, str(exc))
        if rule_set.domain_id != domain_id:
            return _error(
                422,
                "IdMismatch",
                f"rule set targets domain {rule_set.domain_id!r}, not {domain_id!r}",
            )
        data = serialize_rule_set(rule_set)
        store.save_rules(domain_id, data)
        return Response(content=data, media_type="application/json")

    @app.post("/api/validate")
    async def validate_endpoint(request: Request):
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error(400, "BadRequest", f"request body is not JSON: {exc.msg}")
        if not isinstance(body, dict) or "domainId" not in body or "annotation" not in body:
            return _error(400, "BadRequest", "body needs domainId and annotation")
        spec, err = _load_spec_or_error(body["domainId"])
        if err is not None:
            return err
        rule_set = None
        rule_set_id = body.get("ruleSetId")
        if rule_set_id is not None:
            data = store.load_rules(body["domainId"])
            if data is None:
                return _error(
                    404, "UnknownRuleSet", f"domain {body['domainId']!r} has no rule set"
                )
            rule_set = parse_rule_set(data, spec, snapshot, registry.manifest)
            if rule_set.id != rule_set_id:
                return _error(
                    404, "UnknownRuleSet", f"stored rule set is {rule_set.id!r}"
                )
        annotation: Any = body["annotation"]
        if isinstance(annotation, str):
            annotation_bytes = annotation.encode("utf-8")
        else:
            annotation_bytes = json.dumps(annotation, ensure_ascii=False).encode("utf-8")
        try:
            report = validate(
                annotation_bytes, spec, rule_set, snapshot, registry, source="inline"
            )
        except (InvalidDomain, InvalidRuleSet) as exc:
            return _error(422, type(exc).__name__, str(exc))
        return Response(content=render_report(report, "json"), media_type="application/json")

    @app.post("/api/extract")
    async def extract_endpoint(request: Request):
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error(400, "BadRequest", f"request body is not JSON: {exc.msg}")
        if not isinstance(body, dict) or ("html" in body) == ("url" in body):
            return _error(400, "BadRequest", "body needs exactly one of html or url")
        if "html" in body:
            page = body["html"]
            if not isinstance(page, str):
                return _error(400, "BadRequest", "html must be a string")
        else:
            url = body["url"]
            if not isinstance(url, str) or not url.startswith(("http://", "https://")):
                return _error(400, "BadRequest", "url must be absolute http(s)")
            if not config.allow_local_urls and _is_local_target(url):
                return _error(403, "ForbiddenTarget", "loopback/link-local targets denied")
            try:
                page = fetch_page(url, timeout=_EXTRACT_TIMEOUT, max_bytes=_EXTRACT_MAX_BYTES)
            except HttpError as exc:
                return _error(502, "HttpError", str(exc), details={"status": exc.status})
            except FetchError as exc:
                return _error(502, "NetworkError", str(exc))
        return [block_to_json(block) for block in extract_from_html(page)]

    if config.static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app


def serve(config: ServiceConfig) -> None:
    """Run the API with uvicorn; blocks until shutdown."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
