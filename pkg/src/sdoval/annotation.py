"""JSON-LD annotation ingestion.

Annotations are treated as plain JSON following the "@context"/"@type"
conventions; no JSON-LD expansion is performed. Parsing is total: every input
yields either an entity tree or a located SyntaxViolation.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import httpx

_SCHEMA_ORG_CONTEXTS = {
    "http://schema.org",
    "https://schema.org",
    "http://www.schema.org",
    "https://www.schema.org",
}


class SyntaxViolation(Exception):
    """A located syntactic defect in an annotation document.

    Codes: JsonError, MissingType, MultiTypedEntity, BadContext,
    UnresolvedReference.
    """

    def __init__(
        self,
        code: str,
        message: str,
        source_path: str = "",
        line: int | None = None,
        column: int | None = None,
    ):
        super().__init__(message)
        self.code = code
        self.message = message
        self.source_path = source_path
        self.line = line
        self.column = column

    def to_json(self) -> dict:
        out: dict = {"code": self.code, "message": self.message, "path": self.source_path}
        if self.line is not None:
            out["line"] = self.line
            out["column"] = self.column
        return out

    @classmethod
    def from_json(cls, doc: dict) -> "SyntaxViolation":
        return cls(
            doc["code"], doc["message"], doc.get("path", ""),
            doc.get("line"), doc.get("column"),
        )


@dataclass(frozen=True)
class Literal:
    """A scalar annotation value; lexical keeps the exact source rendering."""

    kind: str  # string | number | boolean
    lexical: str


@dataclass(frozen=True)
class AnnotationNode:
    """One typed entity with its property values in document order."""

    type_name: str
    properties: dict[str, tuple["AnnotationValue", ...]]
    source_path: str = ""
    node_id: str | None = None


AnnotationValue = Literal | AnnotationNode


@dataclass(frozen=True)
class ExtractedBlock:
    index: int
    raw: bytes
    parse_result: AnnotationNode | SyntaxViolation


class FetchError(Exception):
    """Base class for page retrieval failures."""


class NetworkError(FetchError):
    pass


class HttpError(FetchError):
    def __init__(self, status: int):
        super().__init__(f"HTTP status {status}")
        self.status = status


class _Num:
    """Raw numeric token captured during JSON decoding."""

    __slots__ = ("token",)

    def __init__(self, token: str):
        self.token = token


def _is_schema_org_context(value) -> bool:
    if not isinstance(value, str):
        return False
    return value.rstrip("/").lower() in _SCHEMA_ORG_CONTEXTS


def _convert_value(value, path: str):
    """Map one JSON value to a Literal or AnnotationNode, or None to drop it."""
    if value is None:
        return None
    if isinstance(value, _Num):
        return Literal("number", value.token)
    if isinstance(value, bool):
        return Literal("boolean", "true" if value else "false")
    if isinstance(value, str):
        return Literal("string", value)
    if isinstance(value, dict):
        return _build_node(value, path)
    raise SyntaxViolation("JsonError", f"unsupported value shape at {path}", path)


def _build_node(obj, path: str) -> AnnotationNode:
    if not isinstance(obj, dict):
        raise SyntaxViolation("MissingType", "annotation entity must be an object", path)
    if "@context" in obj and not _is_schema_org_context(obj["@context"]):
        raise SyntaxViolation(
            "BadContext", f"@context must reference schema.org, got {obj['@context']!r}", path
        )
    type_value = obj.get("@type")
    if type_value is None:
        if set(obj) - {"@context"} == {"@id"}:
            raise SyntaxViolation(
                "UnresolvedReference",
                "bare @id reference cannot be validated as a tree",
                path,
            )
        raise SyntaxViolation("MissingType", "object has no @type", path)
    if isinstance(type_value, list):
        if len(type_value) > 1:
            raise SyntaxViolation(
                "MultiTypedEntity",
                f"multi-typed entities are not supported: {type_value}",
                path,
            )
        type_value = type_value[0] if type_value else None
    if not isinstance(type_value, str) or not type_value:
        raise SyntaxViolation("MissingType", "@type must be a non-empty name", path)

    node_id = obj.get("@id") if isinstance(obj.get("@id"), str) else None
    properties: dict[str, tuple[AnnotationValue, ...]] = {}
    for key, raw in obj.items():
        if key in ("@context", "@type", "@id"):
            continue
        prop_path = f"{path}/{key}"
        if isinstance(raw, list):
            items = _flatten(raw)
            values = [
                v
                for i, item in enumerate(items)
                if (v := _convert_value(item, f"{prop_path}/{i}")) is not None
            ]
        else:
            value = _convert_value(raw, prop_path)
            values = [] if value is None else [value]
        if values:  # absent property, not an empty list
            properties[key] = tuple(values)
    return AnnotationNode(
        type_name=type_value, properties=properties, source_path=path, node_id=node_id
    )


def _flatten(values: list) -> list:
    out = []
    for value in values:
        if isinstance(value, list):
            out.extend(_flatten(value))
        else:
            out.append(value)
    return out


def parse_annotation(document: bytes | str) -> AnnotationNode:
    """Parse one JSON-LD annotation into an entity tree.

    Raises SyntaxViolation for malformed JSON (with line/column), missing or
    multiple @type, non-schema.org @context, and bare @id references.
    """
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SyntaxViolation("JsonError", f"not valid UTF-8: {exc}") from exc
    try:
        doc = json.loads(document, parse_float=_Num, parse_int=_Num)
    except json.JSONDecodeError as exc:
        raise SyntaxViolation("JsonError", exc.msg, "", exc.lineno, exc.colno) from exc
    return _build_node(doc, "")


_SCRIPT_RE = re.compile(
    rb"<script\b([^>]*)>(.*?)</script\s*>", re.IGNORECASE | re.DOTALL
)
_LDJSON_TYPE_RE = re.compile(
    rb"""type\s*=\s*(?:"application/ld\+json"|'application/ld\+json'|application/ld\+json)""",
    re.IGNORECASE,
)


def extract_from_html(page: bytes | str) -> list[ExtractedBlock]:
    """Extract every application/ld+json script block, in document order.

    Malformed blocks yield a SyntaxViolation as their parse result without
    affecting the others. Tag scanning is tolerant (attribute order and case
    do not matter); no full DOM is built.
    """
    if isinstance(page, str):
        page = page.encode("utf-8")
    blocks: list[ExtractedBlock] = []
    for match in _SCRIPT_RE.finditer(page):
        attrs, body = match.group(1), match.group(2)
        if not _LDJSON_TYPE_RE.search(attrs):
            continue
        raw = body.strip()
        try:
            result: AnnotationNode | SyntaxViolation = parse_annotation(raw)
        except SyntaxViolation as violation:
            result = violation
        blocks.append(ExtractedBlock(index=len(blocks), raw=raw, parse_result=result))
    return blocks


def block_to_json(block: ExtractedBlock) -> dict:
    """Wire shape for one extracted block: {index, parsed?} or {index, error?}."""
    out: dict = {"index": block.index}
    if isinstance(block.parse_result, SyntaxViolation):
        out["error"] = block.parse_result.to_json()
    else:
        out["parsed"] = json.loads(block.raw)
    return out


def fetch_page(url: str, timeout: float = 10.0, max_bytes: int | None = None) -> bytes:
    """Fetch a page body over http(s); non-2xx raises HttpError."""
    if not url.startswith(("http://", "https://")):
        raise ValueError(f"not an absolute http(s) URL: {url!r}")
    try:
        response = httpx.get(url, timeout=timeout, follow_redirects=True)
    except httpx.HTTPError as exc:
        raise NetworkError(str(exc)) from exc
    if not (200 <= response.status_code < 300):
        raise HttpError(response.status_code)
    body = response.content
    if max_bytes is not None and len(body) > max_bytes:
        raise NetworkError(f"response exceeds {max_bytes} bytes")
    return body
