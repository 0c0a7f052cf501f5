"""Pinned schema.org vocabulary: classes, properties, and hierarchy queries.

A snapshot is loaded either from the canonical snapshot JSON shipped with the
package or imported from an official schema.org JSON-LD release file. Once
constructed it is immutable and safe to share across threads.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

# Closed set of primitive datatypes understood by the validator.
DATATYPES = frozenset(
    {"Text", "URL", "Number", "Integer", "Float", "Boolean", "Date", "DateTime", "Time"}
)

# Subtype edges within the primitive set (child -> parent).
_DATATYPE_PARENT = {"URL": "Text", "Integer": "Number", "Float": "Number"}

_SCHEMA_PREFIXES = ("schema:", "http://schema.org/", "https://schema.org/")


class VocabularyError(Exception):
    """Base class for vocabulary failures."""


class MalformedRelease(VocabularyError):
    """The release document could not be interpreted."""


class DanglingReference(VocabularyError):
    """One or more entries reference identifiers missing from the release."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


class UnknownClass(VocabularyError):
    """A query named a class that is not part of the snapshot."""


@dataclass(frozen=True)
class VocabClass:
    name: str
    parents: tuple[str, ...]
    description: str | None = None


@dataclass(frozen=True)
class VocabProperty:
    name: str
    domains: tuple[str, ...]
    ranges: tuple[str, ...]
    description: str | None = None


@dataclass(frozen=True)
class VocabularySnapshot:
    """An immutable class/property graph with subclass and domain queries."""

    version: str
    classes: dict[str, VocabClass]
    properties: dict[str, VocabProperty]
    datatypes: frozenset[str] = DATATYPES
    _ancestor_cache: dict[str, tuple[str, ...]] = field(
        default_factory=dict, repr=False, compare=False
    )
    _domain_index: dict[str, tuple[str, ...]] = field(
        default_factory=dict, repr=False, compare=False
    )

    def __post_init__(self):
        self._check_closure()
        self._check_acyclic()
        index: dict[str, list[str]] = {}
        for prop in self.properties.values():
            for domain in prop.domains:
                index.setdefault(domain, []).append(prop.name)
        for domain, names in index.items():
            self._domain_index[domain] = tuple(sorted(names))

    # -- construction checks ------------------------------------------------

    def _check_closure(self):
        problems = []
        for cls in self.classes.values():
            for parent in cls.parents:
                if parent not in self.classes:
                    problems.append(f"class {cls.name}: unknown parent {parent}")
        for prop in self.properties.values():
            if not prop.domains or not prop.ranges:
                problems.append(f"property {prop.name}: empty domains or ranges")
            for domain in prop.domains:
                if domain not in self.classes:
                    problems.append(f"property {prop.name}: unknown domain {domain}")
            for rng in prop.ranges:
                if rng not in self.classes and rng not in self.datatypes:
                    problems.append(f"property {prop.name}: unknown range {rng}")
        if problems:
            raise DanglingReference(problems)

    def _check_acyclic(self):
        state: dict[str, int] = {}  # 1 = visiting, 2 = done

        def visit(name: str, trail: list[str]):
            if state.get(name) == 2:
                return
            if state.get(name) == 1:
                raise MalformedRelease(
                    "subclass cycle: " + " -> ".join(trail + [name])
                )
            state[name] = 1
            for parent in self.classes[name].parents:
                visit(parent, trail + [name])
            state[name] = 2

        for name in self.classes:
            visit(name, [])

    # -- queries -------------------------------------------------------------

    def has_class(self, name: str) -> bool:
        return name in self.classes

    def is_datatype(self, name: str) -> bool:
        return name in self.datatypes

    def ancestors(self, name: str) -> tuple[str, ...]:
        """Transitive superclasses, breadth-first, alphabetical within a level."""
        if name not in self.classes:
            raise UnknownClass(name)
        cached = self._ancestor_cache.get(name)
        if cached is not None:
            return cached
        seen: list[str] = []
        frontier = sorted(self.classes[name].parents)
        while frontier:
            nxt: list[str] = []
            for cls in frontier:
                if cls in seen:
                    continue
                seen.append(cls)
                nxt.extend(self.classes[cls].parents)
            frontier = sorted(set(nxt) - set(seen))
        result = tuple(seen)
        self._ancestor_cache[name] = result
        return result

    def is_subclass_of(self, sub: str, sup: str) -> bool:
        """True iff sub equals sup or sup is among sub's ancestors."""
        if sub not in self.classes:
            raise UnknownClass(sub)
        if sup not in self.classes:
            raise UnknownClass(sup)
        return sub == sup or sup in self.ancestors(sub)

    def properties_of(self, name: str) -> tuple[VocabProperty, ...]:
        """All properties declared on the class or any of its ancestors."""
        if name not in self.classes:
            raise UnknownClass(name)
        names: set[str] = set()
        for cls in (name, *self.ancestors(name)):
            names.update(self._domain_index.get(cls, ()))
        return tuple(self.properties[n] for n in sorted(names))

    def property_names_of(self, name: str) -> frozenset[str]:
        return frozenset(p.name for p in self.properties_of(name))

    def is_datatype_subtype(self, sub: str, sup: str) -> bool:
        """Subtype relation within the primitive datatype set (reflexive)."""
        current: str | None = sub
        while current is not None:
            if current == sup:
                return True
            current = _DATATYPE_PARENT.get(current)
        return False

    # -- serialization --------------------------------------------------------

    def to_json_bytes(self) -> bytes:
        doc = {
            "version": self.version,
            "classes": {
                c.name: _drop_none({"parents": list(c.parents), "description": c.description})
                for c in self.classes.values()
            },
            "properties": {
                p.name: _drop_none(
                    {
                        "domains": list(p.domains),
                        "ranges": list(p.ranges),
                        "description": p.description,
                    }
                )
                for p in self.properties.values()
            },
            "datatypes": sorted(self.datatypes),
        }
        return (json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode(
            "utf-8"
        )

    @classmethod
    def from_json_bytes(cls, data: bytes) -> "VocabularySnapshot":
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise MalformedRelease(f"snapshot is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise MalformedRelease("snapshot root must be an object")
        try:
            classes = {
                name: VocabClass(
                    name=name,
                    parents=tuple(entry.get("parents", [])),
                    description=entry.get("description"),
                )
                for name, entry in doc["classes"].items()
            }
            properties = {
                name: VocabProperty(
                    name=name,
                    domains=tuple(entry["domains"]),
                    ranges=tuple(entry["ranges"]),
                    description=entry.get("description"),
                )
                for name, entry in doc["properties"].items()
            }
            version = doc["version"]
            datatypes = frozenset(doc.get("datatypes", DATATYPES))
        except (KeyError, TypeError, AttributeError) as exc:
            raise MalformedRelease(f"snapshot misses required structure: {exc}") from exc
        return cls(version=version, classes=classes, properties=properties, datatypes=datatypes)


def _drop_none(entry: dict) -> dict:
    return {k: v for k, v in entry.items() if v is not None}


# -- release import -----------------------------------------------------------


def _strip_prefix(identifier: str) -> str:
    for prefix in _SCHEMA_PREFIXES:
        if identifier.startswith(prefix):
            return identifier[len(prefix):]
    return identifier


def _listify(value) -> list:
    if value is None:
        return []
    if isinstance(value, list):
        return value
    return [value]


def _id_refs(value) -> list[str]:
    out = []
    for item in _listify(value):
        if isinstance(item, dict) and "@id" in item:
            out.append(_strip_prefix(item["@id"]))
        elif isinstance(item, str):
            out.append(_strip_prefix(item))
    return out


def _is_excluded(entry: dict) -> bool:
    if "schema:supersededBy" in entry or "supersededBy" in entry:
        return True
    for part in _id_refs(entry.get("schema:isPartOf") or entry.get("isPartOf")):
        if "pending" in part or "attic" in part:
            return True
    return False


def _text_of(entry: dict, key: str) -> str | None:
    value = entry.get("rdfs:" + key, entry.get(key))
    if isinstance(value, dict):
        value = value.get("@value")
    return value if isinstance(value, str) else None


def import_snapshot(document: bytes | str, version: str | None = None) -> VocabularySnapshot:
    """Build a snapshot from an official schema.org JSON-LD release file.

    Superseded and pending/attic entries are dropped. Datatype names outside
    the closed primitive set map to Text with a warning. The release is
    treated as plain JSON; no JSON-LD expansion is performed.
    """
    if isinstance(document, str):
        document = document.encode("utf-8")
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise MalformedRelease(f"release is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("@graph"), list):
        raise MalformedRelease("release must be a JSON object with an @graph list")

    class_entries: dict[str, dict] = {}
    property_entries: dict[str, dict] = {}
    for entry in doc["@graph"]:
        if not isinstance(entry, dict) or "@id" not in entry:
            continue
        name = _strip_prefix(entry["@id"])
        if name == "DataType" or _is_excluded(entry):
            continue
        types = [_strip_prefix(t) for t in _listify(entry.get("@type"))]
        if "rdf:Property" in types or "Property" in types:
            property_entries[name] = entry
        elif "rdfs:Class" in types or "Class" in types or "DataType" in types:
            class_entries[name] = entry

    # Split the class entries into the datatype subtree and proper classes.
    datatype_names: set[str] = set()
    for name, entry in class_entries.items():
        if "DataType" in [_strip_prefix(t) for t in _listify(entry.get("@type"))]:
            datatype_names.add(name)
    changed = True
    while changed:
        changed = False
        for name, entry in class_entries.items():
            if name in datatype_names:
                continue
            parents = _id_refs(entry.get("rdfs:subClassOf") or entry.get("subClassOf"))
            if any(p in datatype_names or p in DATATYPES for p in parents):
                datatype_names.add(name)
                changed = True

    datatype_map: dict[str, str] = {}
    for name in sorted(datatype_names):
        if name in DATATYPES:
            datatype_map[name] = name
        else:
            logger.warning("unknown datatype %s mapped to Text", name)
            datatype_map[name] = "Text"

    problems: list[str] = []
    classes: dict[str, VocabClass] = {}
    for name, entry in class_entries.items():
        if name in datatype_names:
            continue
        parents = []
        for parent in _id_refs(entry.get("rdfs:subClassOf") or entry.get("subClassOf")):
            if ":" in parent:  # non-schema namespace, e.g. rdfs:Class
                continue
            if parent not in class_entries or parent in datatype_names:
                problems.append(f"class {name}: unknown parent {parent}")
                continue
            parents.append(parent)
        classes[name] = VocabClass(
            name=name, parents=tuple(parents), description=_text_of(entry, "comment")
        )

    properties: dict[str, VocabProperty] = {}
    for name, entry in property_entries.items():
        domain_refs = _id_refs(
            entry.get("schema:domainIncludes") or entry.get("domainIncludes")
        )
        domains = []
        for domain in domain_refs:
            if domain in classes:
                domains.append(domain)
            else:
                problems.append(f"property {name}: unknown domain {domain}")
        range_refs = _id_refs(entry.get("schema:rangeIncludes") or entry.get("rangeIncludes"))
        ranges = []
        for rng in range_refs:
            if rng in datatype_map:
                mapped = datatype_map[rng]
                if mapped not in ranges:
                    ranges.append(mapped)
            elif rng in classes:
                ranges.append(rng)
            else:
                problems.append(f"property {name}: unknown range {rng}")
        if not domain_refs:
            problems.append(f"property {name}: no declared domain")
        if not range_refs:
            problems.append(f"property {name}: no declared range")
        properties[name] = VocabProperty(
            name=name,
            domains=tuple(domains),
            ranges=tuple(ranges),
            description=_text_of(entry, "comment"),
        )

    if problems:
        raise DanglingReference(sorted(set(problems)))

    if version is None:
        version = "release-" + hashlib.sha256(document).hexdigest()[:12]
    return VocabularySnapshot(version=version, classes=classes, properties=properties)


def load_snapshot(path) -> VocabularySnapshot:
    with open(path, "rb") as fh:
        return VocabularySnapshot.from_json_bytes(fh.read())


def save_snapshot(snapshot: VocabularySnapshot, path) -> None:
    with open(path, "wb") as fh:
        fh.write(snapshot.to_json_bytes())
