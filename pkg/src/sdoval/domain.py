"""Domain specifications: restricted vocabulary subsets with per-property constraints.

A domain specification names restricted classes (each based on a vocabulary
class), constrains which properties may appear with required/multiple flags,
and narrows each property's admissible value types. Specifications are plain
JSON documents with a canonical serialization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from sdoval.vocabulary import DATATYPES, VocabularySnapshot


class DomainError(Exception):
    """Base class for domain specification failures."""


class DomainSyntaxError(DomainError):
    """The document is not valid JSON."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class SchemaError(DomainError):
    """A required field is missing or has the wrong shape."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class DanglingLocalRef(DomainError):
    """An expected-type reference names a restricted class that does not exist."""

    def __init__(self, path: str, ref: str):
        super().__init__(f"{path}: no restricted class named {ref!r}")
        self.path = path
        self.ref = ref


@dataclass(frozen=True)
class Primitive:
    """Expected type: a primitive datatype such as Text or Number."""

    datatype: str


@dataclass(frozen=True)
class UnrestrictedClass:
    """Expected type: a vocabulary class, optionally narrowed to given subclasses.

    Values of this type are type-checked only; their contents carry no
    constraints.
    """

    class_name: str
    subclasses: tuple[str, ...] | None = None


@dataclass(frozen=True)
class RestrictedRef:
    """Expected type: a restricted class defined in the same specification."""

    local_id: str


ExpectedType = Primitive | UnrestrictedClass | RestrictedRef


@dataclass(frozen=True)
class PropertyConstraint:
    property: str
    required: bool
    multiple: bool
    expected: tuple[ExpectedType, ...]


@dataclass(frozen=True)
class RestrictedClass:
    local_id: str
    based_on: str
    constraints: dict[str, PropertyConstraint]


@dataclass(frozen=True)
class DomainSpecification:
    id: str
    name: str
    version: str
    targets: tuple[str, ...]
    classes: dict[str, RestrictedClass]


@dataclass(frozen=True)
class DomainIssue:
    """One well-formedness defect found by check_domain."""

    code: str  # UnknownBaseClass | PropertyNotOnClass | ExpectedTypeOutsideRange | InvalidSubclassRestriction
    path: str
    message: str

    def to_json(self) -> dict:
        return {"code": self.code, "path": self.path, "message": self.message}


# -- parsing -------------------------------------------------------------------


def _require(obj: dict, key: str, kind, path: str):
    if key not in obj:
        raise SchemaError(path, f"missing required field {key!r}")
    value = obj[key]
    if kind is bool:
        if not isinstance(value, bool):
            raise SchemaError(f"{path}/{key}", "expected a boolean")
    elif kind is str:
        if not isinstance(value, str) or not value:
            raise SchemaError(f"{path}/{key}", "expected a non-empty string")
    elif kind is list:
        if not isinstance(value, list):
            raise SchemaError(f"{path}/{key}", "expected a list")
    elif kind is dict:
        if not isinstance(value, dict):
            raise SchemaError(f"{path}/{key}", "expected an object")
    return value


def _parse_expected(entry, path: str) -> ExpectedType:
    if isinstance(entry, str):
        if entry not in DATATYPES:
            raise SchemaError(
                path, f"{entry!r} is not a primitive datatype; use the object forms for classes"
            )
        return Primitive(entry)
    if not isinstance(entry, dict):
        raise SchemaError(path, "expected a datatype name or an object")
    if "ref" in entry:
        if not isinstance(entry["ref"], str) or not entry["ref"]:
            raise SchemaError(path, "ref must be a non-empty string")
        return RestrictedRef(entry["ref"])
    if "class" in entry:
        if not isinstance(entry["class"], str) or not entry["class"]:
            raise SchemaError(path, "class must be a non-empty string")
        subclasses = None
        if "subclasses" in entry:
            raw = entry["subclasses"]
            if (
                not isinstance(raw, list)
                or not raw
                or not all(isinstance(s, str) and s for s in raw)
            ):
                raise SchemaError(path, "subclasses must be a non-empty list of class names")
            subclasses = tuple(raw)
        return UnrestrictedClass(entry["class"], subclasses)
    raise SchemaError(path, "expected type object needs a 'class' or 'ref' key")


def parse_domain_spec(document: bytes | str) -> DomainSpecification:
    """Parse and structurally validate a domain specification document.

    Structural only: the vocabulary is not consulted (see check_domain).
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise DomainSyntaxError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(doc, dict):
        raise SchemaError("", "document root must be an object")

    missing = [k for k in ("id", "name", "version", "targets", "classes") if k not in doc]
    if missing:
        raise SchemaError("", f"missing required field(s): {', '.join(missing)}")
    spec_id = _require(doc, "id", str, "")
    name = _require(doc, "name", str, "")
    version = _require(doc, "version", str, "")
    targets = _require(doc, "targets", list, "")
    if not targets or not all(isinstance(t, str) and t for t in targets):
        raise SchemaError("targets", "expected a non-empty list of restricted class ids")
    raw_classes = _require(doc, "classes", dict, "")

    classes: dict[str, RestrictedClass] = {}
    for local_id, raw in raw_classes.items():
        cpath = f"classes/{local_id}"
        if not isinstance(raw, dict):
            raise SchemaError(cpath, "expected an object")
        based_on = _require(raw, "basedOn", str, cpath)
        raw_props = _require(raw, "properties", dict, cpath)
        constraints: dict[str, PropertyConstraint] = {}
        for prop_name, raw_constraint in raw_props.items():
            ppath = f"{cpath}/properties/{prop_name}"
            if not isinstance(raw_constraint, dict):
                raise SchemaError(ppath, "expected an object")
            required = _require(raw_constraint, "required", bool, ppath)
            multiple = _require(raw_constraint, "multiple", bool, ppath)
            raw_expected = _require(raw_constraint, "expected", list, ppath)
            if not raw_expected:
                raise SchemaError(f"{ppath}/expected", "expected list must not be empty")
            expected = tuple(
                _parse_expected(entry, f"{ppath}/expected/{i}")
                for i, entry in enumerate(raw_expected)
            )
            constraints[prop_name] = PropertyConstraint(
                property=prop_name, required=required, multiple=multiple, expected=expected
            )
        classes[local_id] = RestrictedClass(
            local_id=local_id, based_on=based_on, constraints=constraints
        )

    for i, target in enumerate(targets):
        if target not in classes:
            raise SchemaError(f"targets/{i}", f"target {target!r} is not a defined class")
    for local_id, cls in classes.items():
        for prop_name, constraint in cls.constraints.items():
            for i, expected in enumerate(constraint.expected):
                if isinstance(expected, RestrictedRef) and expected.local_id not in classes:
                    raise DanglingLocalRef(
                        f"classes/{local_id}/properties/{prop_name}/expected/{i}",
                        expected.local_id,
                    )

    return DomainSpecification(
        id=spec_id, name=name, version=version, targets=tuple(targets), classes=classes
    )


# -- serialization ---------------------------------------------------------------


def _expected_to_json(expected: ExpectedType):
    if isinstance(expected, Primitive):
        return expected.datatype
    if isinstance(expected, UnrestrictedClass):
        out: dict = {"class": expected.class_name}
        if expected.subclasses is not None:
            out["subclasses"] = list(expected.subclasses)
        return out
    return {"ref": expected.local_id}


def domain_spec_to_json(spec: DomainSpecification) -> dict:
    return {
        "id": spec.id,
        "name": spec.name,
        "version": spec.version,
        "targets": list(spec.targets),
        "classes": {
            local_id: {
                "basedOn": cls.based_on,
                "properties": {
                    prop: {
                        "required": constraint.required,
                        "multiple": constraint.multiple,
                        "expected": [_expected_to_json(e) for e in constraint.expected],
                    }
                    for prop, constraint in cls.constraints.items()
                },
            }
            for local_id, cls in spec.classes.items()
        },
    }


def serialize_domain_spec(spec: DomainSpecification) -> bytes:
    """Canonical form: sorted keys, 2-space indent, UTF-8, trailing newline."""
    if not spec.targets:
        raise ValueError("specification has no targets")
    doc = domain_spec_to_json(spec)
    return (json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")


# -- vocabulary consistency -------------------------------------------------------


def _range_classes(snapshot: VocabularySnapshot, ranges) -> list[str]:
    return [r for r in ranges if r in snapshot.classes]


def _range_datatypes(snapshot: VocabularySnapshot, ranges) -> list[str]:
    return [r for r in ranges if snapshot.is_datatype(r)]


def check_domain(spec: DomainSpecification, snapshot: VocabularySnapshot) -> list[DomainIssue]:
    """Check every restricted class against the vocabulary; returns ALL issues."""
    issues: list[DomainIssue] = []
    for local_id in sorted(spec.classes):
        cls = spec.classes[local_id]
        cpath = f"classes/{local_id}"
        if not snapshot.has_class(cls.based_on):
            issues.append(
                DomainIssue(
                    "UnknownBaseClass",
                    f"{cpath}/basedOn",
                    f"{cls.based_on!r} is not a vocabulary class",
                )
            )
            continue
        allowed = snapshot.property_names_of(cls.based_on)
        for prop_name in cls.constraints:
            constraint = cls.constraints[prop_name]
            ppath = f"{cpath}/properties/{prop_name}"
            if prop_name not in allowed:
                issues.append(
                    DomainIssue(
                        "PropertyNotOnClass",
                        ppath,
                        f"{prop_name!r} is not a property of {cls.based_on!r}",
                    )
                )
            if prop_name not in snapshot.properties:
                continue
            ranges = snapshot.properties[prop_name].ranges
            for i, expected in enumerate(constraint.expected):
                issues.extend(
                    _check_expected(spec, snapshot, expected, ranges, f"{ppath}/expected/{i}")
                )
    return issues


def _check_expected(
    spec: DomainSpecification,
    snapshot: VocabularySnapshot,
    expected: ExpectedType,
    ranges,
    path: str,
) -> list[DomainIssue]:
    issues: list[DomainIssue] = []
    if isinstance(expected, Primitive):
        # Text is the schema.org textual fallback; admissible against any range
        # when the domain author lists it explicitly.
        if expected.datatype == "Text":
            return issues
        if not any(
            snapshot.is_datatype_subtype(expected.datatype, r)
            for r in _range_datatypes(snapshot, ranges)
        ):
            issues.append(
                DomainIssue(
                    "ExpectedTypeOutsideRange",
                    path,
                    f"datatype {expected.datatype!r} is not within the declared ranges {list(ranges)}",
                )
            )
    elif isinstance(expected, UnrestrictedClass):
        if not snapshot.has_class(expected.class_name):
            issues.append(
                DomainIssue(
                    "ExpectedTypeOutsideRange",
                    path,
                    f"{expected.class_name!r} is not a vocabulary class",
                )
            )
            return issues
        if not any(
            snapshot.is_subclass_of(expected.class_name, r)
            for r in _range_classes(snapshot, ranges)
        ):
            issues.append(
                DomainIssue(
                    "ExpectedTypeOutsideRange",
                    path,
                    f"class {expected.class_name!r} is not within the declared ranges {list(ranges)}",
                )
            )
        for sub in expected.subclasses or ():
            if not snapshot.has_class(sub) or not snapshot.is_subclass_of(
                sub, expected.class_name
            ):
                issues.append(
                    DomainIssue(
                        "InvalidSubclassRestriction",
                        path,
                        f"{sub!r} is not a subclass of {expected.class_name!r}",
                    )
                )
    else:
        target = spec.classes[expected.local_id]
        if not snapshot.has_class(target.based_on):
            return issues  # flagged as UnknownBaseClass on the target itself
        if not any(
            snapshot.is_subclass_of(target.based_on, r)
            for r in _range_classes(snapshot, ranges)
        ):
            issues.append(
                DomainIssue(
                    "ExpectedTypeOutsideRange",
                    path,
                    f"restricted class {expected.local_id!r} (based on {target.based_on!r}) "
                    f"is not within the declared ranges {list(ranges)}",
                )
            )
    return issues
