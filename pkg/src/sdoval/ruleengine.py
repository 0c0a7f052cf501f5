"""Rule evaluation over annotation trees.

Paths resolve to runtime values (numbers, text, booleans, or unknown);
conditions fire existentially over the Cartesian product of the values bound
to their paths. Unparseable inputs degrade to Unknown rather than raising, and
skipped rules surface as engine diagnostics.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation

from sdoval.annotation import AnnotationNode, Literal
from sdoval.completeness import assign_restricted_classes, is_numeric_lexical
from sdoval.domain import DomainSpecification
from sdoval.rulelang import (
    BUILTIN_SIGNATURES,
    Binary,
    Call,
    Expression,
    FunctionSignature,
    Lit,
    PathExpr,
    PropertyPath,
    PropertyStep,
    Rule,
    RuleSet,
    Unary,
    paths_of_expression,
)
from sdoval.vocabulary import VocabularySnapshot


class EvaluationFault(Exception):
    """A registered utility-function implementation crashed."""


# -- runtime values -----------------------------------------------------------------


@dataclass(frozen=True)
class Number:
    value: Decimal
    lexical: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Text:
    value: str


@dataclass(frozen=True)
class Boolean:
    value: bool


class _Unknown:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNKNOWN"


UNKNOWN = _Unknown()

Value = Number | Text | Boolean | _Unknown

_TRUE = Boolean(True)
_FALSE = Boolean(False)


def render_value(value: Value) -> str:
    """Stable textual rendering used in violation bindings and diagnostics."""
    if isinstance(value, Number):
        return value.lexical if value.lexical is not None else str(value.value)
    if isinstance(value, Text):
        return value.value
    if isinstance(value, Boolean):
        return "true" if value.value else "false"
    return "unknown"


def _literal_to_value(literal: Literal) -> Value:
    if literal.kind == "number":
        return Number(Decimal(literal.lexical), lexical=literal.lexical)
    if literal.kind == "boolean":
        return Boolean(literal.lexical == "true")
    if is_numeric_lexical(literal.lexical):
        return Number(Decimal(literal.lexical), lexical=literal.lexical)
    return Text(literal.lexical)


def _as_number(value: Value) -> Decimal | None:
    if isinstance(value, Number):
        return value.value
    if isinstance(value, Text):
        try:
            if is_numeric_lexical(value.value.strip()):
                return Decimal(value.value.strip())
        except InvalidOperation:
            return None
    return None


def value_as_text(value: Value) -> str | None:
    """Text view of a value for Text-declared function arguments."""
    if isinstance(value, Text):
        return value.value
    if isinstance(value, Number):
        return value.lexical if value.lexical is not None else str(value.value)
    if isinstance(value, Boolean):
        return "true" if value.value else "false"
    return None


# -- calling codes ---------------------------------------------------------------------

_CALLING_CODE_RE = re.compile(r"^\+\d{1,3}$")
_SEPARATORS = " -/."


@dataclass(frozen=True)
class CallingCodeTable:
    """ISO 3166-1 alpha-2 country code -> international calling code ("+43")."""

    entries: dict[str, str]

    def __post_init__(self):
        for country, code in self.entries.items():
            if not _CALLING_CODE_RE.match(code):
                raise ValueError(f"bad calling code for {country!r}: {code!r}")

    @classmethod
    def load(cls, path) -> "CallingCodeTable":
        with open(path, "r", encoding="utf-8") as fh:
            return cls(json.load(fh))

    @classmethod
    def default(cls) -> "CallingCodeTable":
        from sdoval import default_calling_codes_path

        return cls(json.loads(default_calling_codes_path().read_text(encoding="utf-8")))


def extract_country_code(phone: str, table: CallingCodeTable) -> str | None:
    """Pull the international calling code off a phone number.

    "00" normalizes to "+"; a separator after 1-3 leading digits delimits the
    code, otherwise the longest table-known prefix (3, then 2, then 1 digits)
    wins. None when nothing can be extracted.
    """
    s = phone.strip()
    if s.startswith("00"):
        s = "+" + s[2:]
    if not s.startswith("+"):
        return None
    rest = s[1:]
    digits = ""
    for ch in rest[:4]:
        if ch.isdigit():
            digits += ch
        else:
            break
    if 1 <= len(digits) <= 3 and len(rest) > len(digits) and rest[len(digits)] in _SEPARATORS:
        return "+" + digits
    known = set(table.entries.values())
    for size in (3, 2, 1):
        if len(digits) >= size and "+" + digits[:size] in known:
            return "+" + digits[:size]
    return None


def get_country_code_by_country(country: str, table: CallingCodeTable) -> str | None:
    """Case-insensitive alpha-2 lookup; None for unknown codes."""
    return table.entries.get(country.strip().upper())


# -- function registry -------------------------------------------------------------------


class FunctionRegistry:
    """Utility functions callable from rule conditions.

    The manifest (name -> signature) drives static checking; implementations
    receive runtime values and return a value, a string, or None (-> Unknown).
    """

    def __init__(self, calling_codes: CallingCodeTable | None = None):
        self.calling_codes = calling_codes or CallingCodeTable.default()
        self._signatures: dict[str, FunctionSignature] = {}
        self._impls: dict = {}
        table = self.calling_codes
        self.register(
            BUILTIN_SIGNATURES["extractCountryCode"],
            lambda value: extract_country_code(value_as_text(value) or "", table),
        )
        self.register(
            BUILTIN_SIGNATURES["getCountryCodeByCountry"],
            lambda value: get_country_code_by_country(value_as_text(value) or "", table),
        )

    def register(self, signature: FunctionSignature, impl) -> None:
        self._signatures[signature.name] = signature
        self._impls[signature.name] = impl

    @property
    def manifest(self) -> dict[str, FunctionSignature]:
        return dict(self._signatures)

    def call(self, name: str, args: list[Value]) -> Value:
        impl = self._impls.get(name)
        if impl is None:
            raise EvaluationFault(f"no implementation for function {name!r}")
        try:
            result = impl(*args)
        except Exception as exc:
            raise EvaluationFault(f"function {name!r} crashed: {exc!r}") from exc
        if result is None:
            return UNKNOWN
        if isinstance(result, (Number, Text, Boolean, _Unknown)):
            return result
        if isinstance(result, str):
            return Text(result)
        if isinstance(result, bool):
            return Boolean(result)
        if isinstance(result, (int, float, Decimal)):
            return Number(Decimal(str(result)))
        raise EvaluationFault(f"function {name!r} returned unsupported {type(result)!r}")


# -- path resolution ------------------------------------------------------------------------


def resolve_path(
    root: AnnotationNode, path: PropertyPath, snapshot: VocabularySnapshot
) -> list[Value]:
    """Values a path selects from an instance node, in document order.

    Property steps fan out over all values; type filters keep nodes typed as
    (a subclass of) the filter; terminal complex objects come out Unknown.
    """
    current: list = [root]
    for segment in path.segments:
        if isinstance(segment, PropertyStep):
            current = [
                value
                for item in current
                if isinstance(item, AnnotationNode)
                for value in item.properties.get(segment.name, ())
            ]
        else:
            current = [
                item
                for item in current
                if isinstance(item, AnnotationNode)
                and snapshot.has_class(item.type_name)
                and snapshot.has_class(segment.name)
                and snapshot.is_subclass_of(item.type_name, segment.name)
            ]
    out: list[Value] = []
    for item in current:
        if isinstance(item, Literal):
            out.append(_literal_to_value(item))
        else:
            out.append(UNKNOWN)
    return out


# -- expression evaluation ---------------------------------------------------------------------


def evaluate_expression(
    expr: Expression,
    binding: dict[PropertyPath, Value],
    registry: FunctionRegistry,
    diagnostics: list[str] | None = None,
) -> Value:
    """Strict evaluation with Unknown propagation and Kleene and/or."""
    if diagnostics is None:
        diagnostics = []
    return _eval(expr, binding, registry, diagnostics)


def _eval(expr, binding, registry, diagnostics) -> Value:
    if isinstance(expr, Lit):
        if isinstance(expr.value, bool):
            return Boolean(expr.value)
        if isinstance(expr.value, Decimal):
            return Number(expr.value)
        return Text(expr.value)
    if isinstance(expr, PathExpr):
        return binding.get(expr.path, UNKNOWN)
    if isinstance(expr, Call):
        args = [_eval(arg, binding, registry, diagnostics) for arg in expr.args]
        if any(isinstance(arg, _Unknown) for arg in args):
            return UNKNOWN
        return registry.call(expr.function, args)
    if isinstance(expr, Unary):
        operand = _eval(expr.operand, binding, registry, diagnostics)
        if expr.op == "not":
            if isinstance(operand, Boolean):
                return Boolean(not operand.value)
            return UNKNOWN
        number = _as_number(operand)
        return UNKNOWN if number is None else Number(-number)
    # Binary
    if expr.op in ("and", "or"):
        return _eval_logical(expr, binding, registry, diagnostics)
    left = _eval(expr.left, binding, registry, diagnostics)
    right = _eval(expr.right, binding, registry, diagnostics)
    if expr.op in ("==", "!="):
        equal = _values_equal(left, right)
        if equal is None:
            return UNKNOWN
        return Boolean(equal if expr.op == "==" else not equal)
    ln, rn = _as_number(left), _as_number(right)
    if ln is None or rn is None:
        return UNKNOWN
    if expr.op == "<":
        return Boolean(ln < rn)
    if expr.op == "<=":
        return Boolean(ln <= rn)
    if expr.op == ">":
        return Boolean(ln > rn)
    if expr.op == ">=":
        return Boolean(ln >= rn)
    if expr.op == "+":
        return Number(ln + rn)
    if expr.op == "-":
        return Number(ln - rn)
    if expr.op == "*":
        return Number(ln * rn)
    if rn == 0:
        diagnostics.append("division by zero")
        return UNKNOWN
    return Number(ln / rn)


def _eval_logical(expr, binding, registry, diagnostics) -> Value:
    left = _to_tristate(_eval(expr.left, binding, registry, diagnostics))
    if expr.op == "and" and left is False:
        return _FALSE
    if expr.op == "or" and left is True:
        return _TRUE
    right = _to_tristate(_eval(expr.right, binding, registry, diagnostics))
    if expr.op == "and":
        if right is False:
            return _FALSE
        if left is True and right is True:
            return _TRUE
        return UNKNOWN
    if right is True:
        return _TRUE
    if left is False and right is False:
        return _FALSE
    return UNKNOWN


def _to_tristate(value: Value) -> bool | None:
    if isinstance(value, Boolean):
        return value.value
    return None


def _values_equal(left: Value, right: Value) -> bool | None:
    """Equality across runtime kinds; None means Unknown."""
    if isinstance(left, _Unknown) or isinstance(right, _Unknown):
        return None
    if isinstance(left, Number) and isinstance(right, Number):
        return left.value == right.value
    if isinstance(left, Text) and isinstance(right, Text):
        return left.value == right.value
    if isinstance(left, Boolean) and isinstance(right, Boolean):
        return left.value == right.value
    # a numeric string converted to Number against a Text literal: compare
    # numerically when the text parses, else by source rendering
    number, text = None, None
    if isinstance(left, Number) and isinstance(right, Text):
        number, text = left, right
    elif isinstance(left, Text) and isinstance(right, Number):
        number, text = right, left
    if number is not None and text is not None:
        parsed = _as_number(text)
        if parsed is not None:
            return number.value == parsed
        return render_value(number) == text.value
    return False


# -- rule evaluation --------------------------------------------------------------------------


@dataclass(frozen=True)
class RuleViolation:
    rule_id: str
    severity: str
    message: str
    bindings: dict[str, str]
    node_path: str

    def to_json(self) -> dict:
        return {
            "ruleId": self.rule_id,
            "severity": self.severity,
            "message": self.message,
            "bindings": dict(self.bindings),
            "nodePath": self.node_path,
        }


def evaluate_rule(
    rule: Rule,
    root: AnnotationNode,
    registry: FunctionRegistry,
    snapshot: VocabularySnapshot,
    node_path: str = "",
) -> tuple[RuleViolation | None, list[str]]:
    """Evaluate one rule against one instance node.

    Existential semantics: the condition fires if any consistent binding of
    the rule's paths evaluates to true; empty path resolutions mean the rule
    does not fire (missing values belong to completeness).
    """
    paths = paths_of_expression(rule.condition)
    resolved = [resolve_path(root, path, snapshot) for path in paths]
    if any(not values for values in resolved):
        return None, []
    diagnostics: list[str] = []
    saw_unknown = False
    unknown_at: str | None = None
    for combo in itertools.product(*resolved):
        binding = dict(zip(paths, combo))
        result = evaluate_expression(rule.condition, binding, registry, diagnostics)
        if isinstance(result, Boolean) and result.value:
            violation = RuleViolation(
                rule_id=rule.id,
                severity=rule.action.severity,
                message=rule.action.message,
                bindings={path.text: render_value(value) for path, value in binding.items()},
                node_path=node_path,
            )
            return violation, _dedupe(diagnostics)
        if isinstance(result, _Unknown) and not saw_unknown:
            saw_unknown = True
            for path, value in binding.items():
                if isinstance(value, _Unknown):
                    unknown_at = path.text
                    break
    if saw_unknown:
        diagnostics.append(
            f"rule {rule.id} skipped: unknown value at {unknown_at or 'condition'}"
        )
    return None, _dedupe(diagnostics)


def _dedupe(items: list[str]) -> list[str]:
    seen: set[str] = set()
    out = []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def run_rules(
    rule_set: RuleSet,
    root: AnnotationNode,
    registry: FunctionRegistry,
    spec: DomainSpecification,
    snapshot: VocabularySnapshot,
) -> tuple[list[RuleViolation], list[str]]:
    """Evaluate every rule once per instance node matching its scope.

    Results keep rule-set order first, instance document order second.
    Implementation crashes become diagnostics without aborting other rules.
    """
    assignments = assign_restricted_classes(root, spec, snapshot)
    violations: list[RuleViolation] = []
    diagnostics: list[str] = []
    for rule in rule_set.rules:
        for node, local_id, path in assignments:
            if local_id != rule.scope:
                continue
            try:
                violation, notes = evaluate_rule(rule, node, registry, snapshot, path)
            except EvaluationFault as fault:
                diagnostics.append(f"rule {rule.id} aborted: {fault}")
                continue
            if violation is not None:
                violations.append(violation)
            diagnostics.extend(notes)
    return violations, diagnostics
