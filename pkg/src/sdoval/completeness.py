"""Completeness validation of an annotation tree against a domain specification.

An annotation is complete when every required property is present, no
unspecified property appears, and every value conforms to one of its
property's expected types. Violations are collected exhaustively, never
raised.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date, datetime, time

from sdoval.annotation import AnnotationNode, Literal
from sdoval.domain import (
    DomainSpecification,
    ExpectedType,
    Primitive,
    RestrictedClass,
    RestrictedRef,
    UnrestrictedClass,
)
from sdoval.vocabulary import UnknownClass, VocabularySnapshot


class InvalidDomain(Exception):
    """The domain specification breaks validate_completeness's precondition."""


@dataclass(frozen=True)
class CompletenessViolation:
    code: str  # MissingRequiredProperty | UnspecifiedProperty | CardinalityViolation | TypeMismatch | UnknownTargetType | DatatypeLexicalError
    path: str
    expected: str
    found: str
    severity: str = "Error"

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity,
            "path": self.path,
            "expected": self.expected,
            "found": self.found,
        }


_NUMBER_RE = re.compile(r"^[+-]?\d+(\.\d+)?([eE][+-]?\d+)?$")
_INTEGER_RE = re.compile(r"^[+-]?\d+$")
_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


def is_numeric_lexical(text: str) -> bool:
    return bool(_NUMBER_RE.match(text))


def literal_conforms(datatype: str, literal: Literal) -> bool:
    """Lexical datatype check; numeric strings are admissible numbers."""
    kind, lexical = literal.kind, literal.lexical
    if datatype == "Text":
        return kind == "string"
    if datatype == "URL":
        return kind == "string" and bool(
            re.match(r"^https?://[^\s/?#]+", lexical)
        )
    if datatype in ("Number", "Float"):
        return kind == "number" or (kind == "string" and is_numeric_lexical(lexical))
    if datatype == "Integer":
        return kind in ("number", "string") and bool(_INTEGER_RE.match(lexical))
    if datatype == "Boolean":
        return kind == "boolean" or (kind == "string" and lexical in ("true", "false"))
    if datatype == "Date":
        if kind != "string" or not _DATE_RE.match(lexical):
            return False
        try:
            date.fromisoformat(lexical)
            return True
        except ValueError:
            return False
    if datatype == "DateTime":
        if kind != "string" or "T" not in lexical:
            return False
        try:
            datetime.fromisoformat(lexical.replace("Z", "+00:00"))
            return True
        except ValueError:
            return False
    if datatype == "Time":
        if kind != "string":
            return False
        try:
            time.fromisoformat(lexical)
            return True
        except ValueError:
            return False
    return False


def _kind_compatible(datatype: str, kind: str) -> bool:
    if datatype in ("Number", "Float", "Integer"):
        return kind in ("number", "string")
    if datatype == "Boolean":
        return kind in ("boolean", "string")
    return kind == "string"


def _describe_expected(expected: tuple[ExpectedType, ...]) -> str:
    parts = []
    for entry in expected:
        if isinstance(entry, Primitive):
            parts.append(entry.datatype)
        elif isinstance(entry, UnrestrictedClass):
            if entry.subclasses:
                parts.append(f"{entry.class_name}[{', '.join(entry.subclasses)}]")
            else:
                parts.append(entry.class_name)
        else:
            parts.append(f"restricted {entry.local_id}")
    return " or ".join(parts)


def _describe_value(value) -> str:
    if isinstance(value, Literal):
        return f"{value.kind} {value.lexical!r}"
    return f"node of type {value.type_name}"


def _node_matches_class(
    snapshot: VocabularySnapshot, node: AnnotationNode, class_name: str
) -> bool:
    if not snapshot.has_class(node.type_name) or not snapshot.has_class(class_name):
        return False
    return snapshot.is_subclass_of(node.type_name, class_name)


def _value_matches(
    spec: DomainSpecification,
    snapshot: VocabularySnapshot,
    expected: ExpectedType,
    value,
) -> bool:
    if isinstance(expected, Primitive):
        return isinstance(value, Literal) and literal_conforms(expected.datatype, value)
    if not isinstance(value, AnnotationNode):
        return False
    if isinstance(expected, UnrestrictedClass):
        if not _node_matches_class(snapshot, value, expected.class_name):
            return False
        if expected.subclasses is not None:
            return any(
                _node_matches_class(snapshot, value, sub) for sub in expected.subclasses
            )
        return True
    return _node_matches_class(snapshot, value, spec.classes[expected.local_id].based_on)


def match_target(
    root: AnnotationNode, spec: DomainSpecification, snapshot: VocabularySnapshot
) -> str | None:
    """Pick the target restricted class for a root node, most specific first."""
    exact = [t for t in spec.targets if spec.classes[t].based_on == root.type_name]
    if exact:
        return exact[0]
    if not snapshot.has_class(root.type_name):
        return None
    candidates = [
        t
        for t in spec.targets
        if snapshot.has_class(spec.classes[t].based_on)
        and snapshot.is_subclass_of(root.type_name, spec.classes[t].based_on)
    ]
    if not candidates:
        return None
    # keep targets whose base has no strict subclass among the other candidates
    minimal = []
    for t in candidates:
        base = spec.classes[t].based_on
        dominated = any(
            other is not t
            and spec.classes[other].based_on != base
            and snapshot.is_subclass_of(spec.classes[other].based_on, base)
            for other in candidates
        )
        if not dominated:
            minimal.append(t)
    return minimal[0]


def assign_restricted_classes(
    root: AnnotationNode, spec: DomainSpecification, snapshot: VocabularySnapshot
) -> list[tuple[AnnotationNode, str, str]]:
    """(node, restricted class local id, path) for every node the domain governs.

    Nodes accepted through an UnrestrictedClass expected type carry no
    restricted class and are not listed. Document order.
    """
    target = match_target(root, spec, snapshot)
    if target is None:
        return []
    assignments: list[tuple[AnnotationNode, str, str]] = []
    _walk(root, spec.classes[target], "", spec, snapshot, None, assignments)
    return assignments


def validate_completeness(
    root: AnnotationNode, spec: DomainSpecification, snapshot: VocabularySnapshot
) -> list[CompletenessViolation]:
    """All completeness violations of the annotation, in deterministic order.

    Requires check_domain(spec, snapshot) == []; a spec that breaks the walk
    surfaces as InvalidDomain rather than a violation list.
    """
    target = match_target(root, spec, snapshot)
    if target is None:
        return [
            CompletenessViolation(
                code="UnknownTargetType",
                path="",
                expected="one of the domain targets: "
                + ", ".join(spec.classes[t].based_on for t in spec.targets),
                found=_describe_value(root),
            )
        ]
    violations: list[CompletenessViolation] = []
    try:
        _walk(root, spec.classes[target], "", spec, snapshot, violations, None)
    except (UnknownClass, KeyError) as exc:
        raise InvalidDomain(
            f"domain specification failed during validation: {exc!r}; "
            "run check_domain before validating"
        ) from exc
    return violations


def _walk(
    node: AnnotationNode,
    rcls: RestrictedClass,
    path: str,
    spec: DomainSpecification,
    snapshot: VocabularySnapshot,
    violations: list[CompletenessViolation] | None,
    assignments: list[tuple[AnnotationNode, str, str]] | None,
) -> None:
    if assignments is not None:
        assignments.append((node, rcls.local_id, path))
    if violations is not None:
        for prop in sorted(rcls.constraints):
            constraint = rcls.constraints[prop]
            if constraint.required and prop not in node.properties:
                violations.append(
                    CompletenessViolation(
                        code="MissingRequiredProperty",
                        path=f"{path}/{prop}",
                        expected=_describe_expected(constraint.expected) + " (required)",
                        found="property absent",
                    )
                )
    for prop, values in node.properties.items():
        prop_path = f"{path}/{prop}"
        constraint = rcls.constraints.get(prop)
        if constraint is None:
            if violations is not None:
                violations.append(
                    CompletenessViolation(
                        code="UnspecifiedProperty",
                        path=prop_path,
                        expected=f"a property constrained on {rcls.local_id}",
                        found=prop,
                    )
                )
            continue
        if violations is not None and len(values) > 1 and not constraint.multiple:
            violations.append(
                CompletenessViolation(
                    code="CardinalityViolation",
                    path=prop_path,
                    expected="a single value",
                    found=f"{len(values)} values",
                )
            )
        for value in values:
            matched = None
            for expected in constraint.expected:
                if _value_matches(spec, snapshot, expected, value):
                    matched = expected
                    break
            if matched is None:
                if violations is not None:
                    violations.append(_mismatch(constraint, value, prop_path))
                continue
            if isinstance(matched, RestrictedRef):
                _walk(
                    value,
                    spec.classes[matched.local_id],
                    prop_path,
                    spec,
                    snapshot,
                    violations,
                    assignments,
                )


def _mismatch(constraint, value, path: str) -> CompletenessViolation:
    expected = constraint.expected
    sole_primitive = len(expected) == 1 and isinstance(expected[0], Primitive)
    if (
        sole_primitive
        and isinstance(value, Literal)
        and _kind_compatible(expected[0].datatype, value.kind)
    ):
        return CompletenessViolation(
            code="DatatypeLexicalError",
            path=path,
            expected=expected[0].datatype,
            found=_describe_value(value),
        )
    return CompletenessViolation(
        code="TypeMismatch",
        path=path,
        expected=_describe_expected(expected),
        found=_describe_value(value),
    )
