"""Three-stage validation pipeline: syntax, completeness, then rules.

The rule stage only runs when completeness found nothing; the overall verdict
is Invalid-Syntax, Incomplete, Inconsistent, or Valid. Reports serialize to a
canonical JSON form and a line-oriented text form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from sdoval.annotation import SyntaxViolation, parse_annotation
from sdoval.completeness import (
    CompletenessViolation,
    InvalidDomain,
    validate_completeness,
)
from sdoval.domain import DomainSpecification, check_domain
from sdoval.ruleengine import FunctionRegistry, RuleViolation, run_rules
from sdoval.rulelang import RuleSet
from sdoval.vocabulary import VocabularySnapshot

VERDICT_INVALID_SYNTAX = "Invalid-Syntax"
VERDICT_INCOMPLETE = "Incomplete"
VERDICT_INCONSISTENT = "Inconsistent"
VERDICT_VALID = "Valid"

_VERDICT_STAGE = {
    VERDICT_INVALID_SYNTAX: "Syntax",
    VERDICT_INCOMPLETE: "Completeness",
    VERDICT_INCONSISTENT: "Rules",
    VERDICT_VALID: "Done",
}


class InvalidRuleSet(Exception):
    """The rule set does not belong to the domain being validated."""


@dataclass(frozen=True)
class ValidationReport:
    annotation_source: str
    domain_id: str
    rule_set_id: str | None
    verdict: str
    syntax: SyntaxViolation | None = None
    completeness: tuple[CompletenessViolation, ...] = ()
    rules: tuple[RuleViolation, ...] = ()
    engine_diagnostics: tuple[str, ...] = ()

    @property
    def stage_reached(self) -> str:
        return _VERDICT_STAGE[self.verdict]

    def __eq__(self, other):
        if not isinstance(other, ValidationReport):
            return NotImplemented
        return report_to_json(self) == report_to_json(other)

    def __hash__(self):
        return hash(json.dumps(report_to_json(self), sort_keys=True))


def _verdict(
    syntax: SyntaxViolation | None,
    completeness: tuple[CompletenessViolation, ...],
    rules: tuple[RuleViolation, ...],
) -> str:
    if syntax is not None:
        return VERDICT_INVALID_SYNTAX
    if completeness:
        return VERDICT_INCOMPLETE
    if any(v.severity == "Error" for v in rules):
        return VERDICT_INCONSISTENT
    return VERDICT_VALID


def validate(
    annotation_bytes: bytes | str,
    spec: DomainSpecification,
    rule_set: RuleSet | None,
    snapshot: VocabularySnapshot,
    registry: FunctionRegistry | None = None,
    source: str = "inline",
) -> ValidationReport:
    """Run the full pipeline over one annotation document."""
    issues = check_domain(spec, snapshot)
    if issues:
        raise InvalidDomain(
            f"domain {spec.id!r} has {len(issues)} issue(s); first: {issues[0].message}"
        )
    if rule_set is not None:
        if rule_set.domain_id != spec.id:
            raise InvalidRuleSet(
                f"rule set {rule_set.id!r} targets domain {rule_set.domain_id!r}, "
                f"not {spec.id!r}"
            )
        for rule in rule_set.rules:
            if rule.scope not in spec.classes:
                raise InvalidRuleSet(
                    f"rule {rule.id!r} scopes unknown restricted class {rule.scope!r}"
                )

    try:
        root = parse_annotation(annotation_bytes)
    except SyntaxViolation as violation:
        return ValidationReport(
            annotation_source=source,
            domain_id=spec.id,
            rule_set_id=None if rule_set is None else rule_set.id,
            verdict=VERDICT_INVALID_SYNTAX,
            syntax=violation,
        )

    completeness = tuple(validate_completeness(root, spec, snapshot))
    if completeness:
        return ValidationReport(
            annotation_source=source,
            domain_id=spec.id,
            rule_set_id=None if rule_set is None else rule_set.id,
            verdict=VERDICT_INCOMPLETE,
            completeness=completeness,
        )

    rules: tuple[RuleViolation, ...] = ()
    diagnostics: tuple[str, ...] = ()
    if rule_set is not None:
        found, notes = run_rules(
            rule_set, root, registry or FunctionRegistry(), spec, snapshot
        )
        rules = tuple(found)
        diagnostics = tuple(notes)
    return ValidationReport(
        annotation_source=source,
        domain_id=spec.id,
        rule_set_id=None if rule_set is None else rule_set.id,
        verdict=_verdict(None, (), rules),
        rules=rules,
        engine_diagnostics=diagnostics,
    )


# -- serialization ------------------------------------------------------------------


def report_to_json(report: ValidationReport) -> dict:
    doc: dict = {
        "source": report.annotation_source,
        "domainId": report.domain_id,
        "verdict": report.verdict,
        "completeness": [v.to_json() for v in report.completeness],
        "rules": [v.to_json() for v in report.rules],
        "diagnostics": list(report.engine_diagnostics),
    }
    if report.rule_set_id is not None:
        doc["ruleSetId"] = report.rule_set_id
    if report.syntax is not None:
        doc["syntax"] = report.syntax.to_json()
    return doc


def render_report(report: ValidationReport, format: str = "json") -> bytes:
    """Canonical JSON, or a text line per violation plus the final verdict."""
    if format == "json":
        return (
            json.dumps(report_to_json(report), indent=2, sort_keys=True, ensure_ascii=False)
            + "\n"
        ).encode("utf-8")
    if format != "text":
        raise ValueError(f"unknown report format {format!r}")
    lines = []
    if report.syntax is not None:
        s = report.syntax
        lines.append(f"ERROR {s.code} {s.source_path or '/'}: {s.message}")
    for v in report.completeness:
        lines.append(
            f"{v.severity.upper()} {v.code} {v.path or '/'}: "
            f"expected {v.expected}, found {v.found}"
        )
    for v in report.rules:
        lines.append(f"{v.severity.upper()} {v.rule_id} {v.node_path or '/'}: {v.message}")
    lines.append(f"verdict: {report.verdict}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_report(data: bytes | str) -> ValidationReport:
    """Inverse of render_report(..., "json")."""
    doc = json.loads(data)
    syntax = None
    if "syntax" in doc:
        syntax = SyntaxViolation.from_json(doc["syntax"])
    completeness = tuple(
        CompletenessViolation(
            code=v["code"],
            path=v["path"],
            expected=v["expected"],
            found=v["found"],
            severity=v["severity"],
        )
        for v in doc.get("completeness", [])
    )
    rules = tuple(
        RuleViolation(
            rule_id=v["ruleId"],
            severity=v["severity"],
            message=v["message"],
            bindings=dict(v["bindings"]),
            node_path=v["nodePath"],
        )
        for v in doc.get("rules", [])
    )
    return ValidationReport(
        annotation_source=doc["source"],
        domain_id=doc["domainId"],
        rule_set_id=doc.get("ruleSetId"),
        verdict=doc["verdict"],
        syntax=syntax,
        completeness=completeness,
        rules=rules,
        engine_diagnostics=tuple(doc.get("diagnostics", [])),
    )
