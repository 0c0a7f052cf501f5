"""Condition-action rule language: concrete syntax, AST, and static checks.

Rule sets are JSON documents whose "condition" fields hold boolean expressions
over property paths, literals, operators, and utility-function calls, e.g.

    HotelRoom.floorSize.QuantitativeValue.value <= 0

Operator precedence, low to high: or; and; not; comparisons; + -; * /;
unary -; primary. Paths are statically resolved against the domain
specification, and the whole condition is type-checked before a rule set is
accepted.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from decimal import Decimal

from sdoval.domain import (
    DomainSpecification,
    Primitive,
    RestrictedRef,
    SchemaError,
    UnrestrictedClass,
)
from sdoval.vocabulary import VocabularySnapshot

_NUMERIC_DATATYPES = {"Number", "Integer", "Float"}
_SEVERITIES = ("Error", "Warning", "Info")


# -- errors ---------------------------------------------------------------------


class RuleError(Exception):
    """Base class for rule parsing and checking failures."""


class ConditionSyntaxError(RuleError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class UnknownScopeClass(RuleError):
    pass


class PathError(RuleError):
    def __init__(self, path_text: str, message: str):
        super().__init__(f"{path_text}: {message}")
        self.path_text = path_text


class UnknownFunction(RuleError):
    pass


class ArityError(RuleError):
    pass


class ConditionTypeError(RuleError):
    pass


# -- function manifest ------------------------------------------------------------


@dataclass(frozen=True)
class FunctionSignature:
    """Declared shape of a utility function callable from rule conditions."""

    name: str
    arg_types: tuple[str, ...]  # entries from {"Text", "Number", "Boolean"}
    result_type: str

    @property
    def arity(self) -> int:
        return len(self.arg_types)


BUILTIN_SIGNATURES = {
    "extractCountryCode": FunctionSignature("extractCountryCode", ("Text",), "Text"),
    "getCountryCodeByCountry": FunctionSignature(
        "getCountryCodeByCountry", ("Text",), "Text"
    ),
}

_MANIFEST_TYPE_TO_STATIC = {"Text": "string", "Number": "number", "Boolean": "boolean"}


# -- AST ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PropertyStep:
    name: str


@dataclass(frozen=True)
class TypeFilter:
    name: str


PathSegment = PropertyStep | TypeFilter


@dataclass(frozen=True)
class PropertyPath:
    head: str
    segments: tuple[PathSegment, ...]

    @property
    def text(self) -> str:
        return ".".join([self.head] + [s.name for s in self.segments])


@dataclass(frozen=True)
class Lit:
    value: Decimal | str | bool


@dataclass(frozen=True)
class PathExpr:
    path: PropertyPath
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Unary:
    op: str  # not | neg
    operand: "Expression"


@dataclass(frozen=True)
class Binary:
    op: str  # and or == != < <= > >= + - * /
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    function: str
    args: tuple["Expression", ...]
    offset: int = field(default=0, compare=False)


Expression = Lit | PathExpr | Unary | Binary | Call


@dataclass(frozen=True)
class ShowAction:
    message: str
    severity: str  # Error | Warning | Info


@dataclass(frozen=True)
class Rule:
    id: str
    scope: str
    condition: Expression
    action: ShowAction
    kind: str  # Local | Global, derived from the distinct path count


@dataclass(frozen=True)
class RuleSet:
    id: str
    domain_id: str
    rules: tuple[Rule, ...]


# -- lexer -------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+(\.\d+)?([eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==|!=|<=|>=|[<>+\-*/(),.])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"or", "and", "not", "true", "false"}


@dataclass(frozen=True)
class _Token:
    kind: str  # number | string | ident | keyword | op | end
    value: str
    offset: int


def _lex(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(source):
        if source[pos] == '"':
            start = pos
            text, pos = _lex_string(source, pos)
            tokens.append(_Token("string", text, start))
            continue
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise ConditionSyntaxError(f"unexpected character {source[pos]!r}", pos)
        start = pos
        pos = match.end()
        if match.lastgroup == "ws":
            continue
        kind = match.lastgroup
        value = match.group()
        if kind == "ident" and value in _KEYWORDS:
            kind = "keyword"
        tokens.append(_Token(kind, value, start))
    tokens.append(_Token("end", "", len(source)))
    return tokens


def _lex_string(source: str, pos: int) -> tuple[str, int]:
    out = []
    i = pos + 1
    while i < len(source):
        ch = source[i]
        if ch == "\\":
            if i + 1 >= len(source) or source[i + 1] not in ('"', "\\"):
                raise ConditionSyntaxError("invalid escape; only \\\" and \\\\ exist", i)
            out.append(source[i + 1])
            i += 2
        elif ch == '"':
            return "".join(out), i + 1
        else:
            out.append(ch)
            i += 1
    raise ConditionSyntaxError("unterminated string", pos)


# -- parser ------------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str):
        self.tokens = _lex(source)
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect_op(self, op: str) -> _Token:
        token = self.current
        if token.kind != "op" or token.value != op:
            raise ConditionSyntaxError(f"expected {op!r}", token.offset)
        return self.advance()

    def at_op(self, *ops: str) -> bool:
        return self.current.kind == "op" and self.current.value in ops

    def at_keyword(self, word: str) -> bool:
        return self.current.kind == "keyword" and self.current.value == word

    def parse(self) -> Expression:
        expr = self.parse_or()
        if self.current.kind != "end":
            raise ConditionSyntaxError(
                f"unexpected trailing input {self.current.value!r}", self.current.offset
            )
        return expr

    def parse_or(self) -> Expression:
        left = self.parse_and()
        while self.at_keyword("or"):
            self.advance()
            left = Binary("or", left, self.parse_and())
        return left

    def parse_and(self) -> Expression:
        left = self.parse_not()
        while self.at_keyword("and"):
            self.advance()
            left = Binary("and", left, self.parse_not())
        return left

    def parse_not(self) -> Expression:
        if self.at_keyword("not"):
            self.advance()
            return Unary("not", self.parse_cmp())
        return self.parse_cmp()

    def parse_cmp(self) -> Expression:
        left = self.parse_add()
        if self.at_op("==", "!=", "<=", ">=", "<", ">"):
            op = self.advance().value
            return Binary(op, left, self.parse_add())
        return left

    def parse_add(self) -> Expression:
        left = self.parse_mul()
        while self.at_op("+", "-"):
            op = self.advance().value
            left = Binary(op, left, self.parse_mul())
        return left

    def parse_mul(self) -> Expression:
        left = self.parse_unary()
        while self.at_op("*", "/"):
            op = self.advance().value
            left = Binary(op, left, self.parse_unary())
        return left

    def parse_unary(self) -> Expression:
        if self.at_op("-"):
            self.advance()
            return Unary("neg", self.parse_primary())
        return self.parse_primary()

    def parse_primary(self) -> Expression:
        token = self.current
        if token.kind == "number":
            self.advance()
            return Lit(Decimal(token.value))
        if token.kind == "string":
            self.advance()
            return Lit(token.value)
        if token.kind == "keyword" and token.value in ("true", "false"):
            self.advance()
            return Lit(token.value == "true")
        if self.at_op("("):
            self.advance()
            expr = self.parse_or()
            self.expect_op(")")
            return expr
        if token.kind == "ident":
            return self.parse_path_or_call()
        raise ConditionSyntaxError(f"unexpected token {token.value!r}", token.offset)

    def parse_path_or_call(self) -> Expression:
        name = self.advance()
        if self.at_op("("):
            self.advance()
            args: list[Expression] = []
            if not self.at_op(")"):
                args.append(self.parse_or())
                while self.at_op(","):
                    self.advance()
                    args.append(self.parse_or())
            self.expect_op(")")
            return Call(name.value, tuple(args), offset=name.offset)
        if not self.at_op("."):
            raise ConditionSyntaxError(
                f"bare identifier {name.value!r}; expected a path or a call", name.offset
            )
        segments: list[PathSegment] = []
        while self.at_op("."):
            self.advance()
            part = self.current
            if part.kind not in ("ident", "keyword"):
                raise ConditionSyntaxError("expected a path segment", part.offset)
            self.advance()
            if part.value[0].isupper():
                segments.append(TypeFilter(part.value))
            else:
                segments.append(PropertyStep(part.value))
        return PathExpr(
            PropertyPath(head=name.value, segments=tuple(segments)), offset=name.offset
        )


def parse_condition(source: str) -> Expression:
    """Parse a condition expression without static checks."""
    return _Parser(source).parse()


# -- pretty printer -----------------------------------------------------------------

_LEVELS = {"or": 1, "and": 2, "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
           "+": 5, "-": 5, "*": 6, "/": 6}


def _level(expr: Expression) -> int:
    if isinstance(expr, Binary):
        return _LEVELS[expr.op]
    if isinstance(expr, Unary):
        return 3 if expr.op == "not" else 7
    return 8


def format_condition(expr: Expression) -> str:
    """Render an AST to source that reparses to an identical AST."""
    return _format(expr, 0)


def _format(expr: Expression, minimum: int) -> str:
    level = _level(expr)
    if isinstance(expr, Lit):
        if isinstance(expr.value, bool):
            text = "true" if expr.value else "false"
        elif isinstance(expr.value, Decimal):
            text = str(expr.value)
        else:
            escaped = expr.value.replace("\\", "\\\\").replace('"', '\\"')
            text = f'"{escaped}"'
    elif isinstance(expr, PathExpr):
        text = expr.path.text
    elif isinstance(expr, Call):
        text = f"{expr.function}({', '.join(_format(a, 0) for a in expr.args)})"
    elif isinstance(expr, Unary):
        if expr.op == "not":
            text = "not " + _format(expr.operand, 4)
        else:
            text = "-" + _format(expr.operand, 8)
    else:
        op_level = _LEVELS[expr.op]
        if expr.op in ("or", "and"):
            # left-associative chains; 'not' binds tighter than both
            left = _format(expr.left, op_level)
            right = _format(expr.right, op_level + 1)
        elif op_level == 4:
            # comparisons are non-associative: operands must sit at add level
            left = _format(expr.left, 5)
            right = _format(expr.right, 5)
        else:
            left = _format(expr.left, op_level)
            right = _format(expr.right, op_level + 1)
        text = f"{left} {expr.op} {right}"
    if level < minimum:
        return f"({text})"
    return text


# -- static path and type checking ----------------------------------------------------


class _PathContext:
    """Tracks where a path walk stands: inside a restricted class, a plain
    vocabulary class, or just after a property step (pending expected types)."""

    __slots__ = ("mode", "payload")

    def __init__(self, mode: str, payload):
        self.mode = mode  # restricted | vocab | pending | vocab_pending
        self.payload = payload


def check_path(
    path: PropertyPath,
    scope: str,
    spec: DomainSpecification,
    snapshot: VocabularySnapshot,
) -> str:
    """Statically resolve a path; returns its static type ("number"|"string")."""
    text = path.text
    if path.head != scope:
        raise PathError(text, f"path head {path.head!r} must be the rule scope {scope!r}")
    if not path.segments:
        raise PathError(text, "path needs at least one property step")
    if isinstance(path.segments[0], TypeFilter):
        raise PathError(text, "the first segment after the scope must be a property step")

    ctx = _PathContext("restricted", spec.classes[scope])
    for segment in path.segments:
        if isinstance(segment, PropertyStep):
            ctx = _enter_property(ctx, segment.name, text, spec, snapshot)
        else:
            ctx = _apply_filter(ctx, segment.name, text, spec, snapshot)

    if ctx.mode == "pending":
        primitives = [e.datatype for e in ctx.payload if isinstance(e, Primitive)]
        return "number" if any(d in _NUMERIC_DATATYPES for d in primitives) else "string"
    if ctx.mode == "vocab_pending":
        return (
            "number"
            if any(r in _NUMERIC_DATATYPES for r in ctx.payload)
            else "string"
        )
    # path ends on a type filter: values are complex objects (unknown at runtime)
    return "string"


def _nested_context(pending, text: str, spec: DomainSpecification) -> _PathContext:
    """Resolve a property step that directly follows another property step."""
    node_types = [e for e in pending if not isinstance(e, Primitive)]
    if len(node_types) == 1 and isinstance(node_types[0], RestrictedRef):
        return _PathContext("restricted", spec.classes[node_types[0].local_id])
    raise PathError(
        text,
        "ambiguous step: insert a type filter to pick among the expected types",
    )


def _enter_property(
    ctx: _PathContext,
    name: str,
    text: str,
    spec: DomainSpecification,
    snapshot: VocabularySnapshot,
) -> _PathContext:
    if ctx.mode == "pending":
        ctx = _nested_context(ctx.payload, text, spec)
    elif ctx.mode == "vocab_pending":
        classes = [r for r in ctx.payload if snapshot.has_class(r)]
        if len(classes) != 1:
            raise PathError(
                text,
                "ambiguous step: insert a type filter to pick among the declared ranges",
            )
        ctx = _PathContext("vocab", classes[0])
    if ctx.mode == "restricted":
        rcls = ctx.payload
        constraint = rcls.constraints.get(name)
        if constraint is None:
            raise PathError(
                text, f"property {name!r} is not constrained on {rcls.local_id!r}"
            )
        return _PathContext("pending", constraint.expected)
    # vocab class context
    class_name = ctx.payload
    if name not in snapshot.property_names_of(class_name):
        raise PathError(text, f"property {name!r} does not exist on {class_name!r}")
    return _PathContext("vocab_pending", snapshot.properties[name].ranges)


def _related(snapshot: VocabularySnapshot, a: str, b: str) -> bool:
    return snapshot.is_subclass_of(a, b) or snapshot.is_subclass_of(b, a)


def _apply_filter(
    ctx: _PathContext,
    name: str,
    text: str,
    spec: DomainSpecification,
    snapshot: VocabularySnapshot,
) -> _PathContext:
    if ctx.mode not in ("pending", "vocab_pending"):
        raise PathError(text, f"type filter {name!r} may only follow a property step")
    if not snapshot.has_class(name):
        raise PathError(text, f"type filter {name!r} is not a vocabulary class")
    if ctx.mode == "vocab_pending":
        if not any(
            snapshot.has_class(r) and _related(snapshot, name, r) for r in ctx.payload
        ):
            raise PathError(
                text, f"type filter {name!r} does not match the declared ranges"
            )
        return _PathContext("vocab", name)
    for expected in ctx.payload:
        if isinstance(expected, RestrictedRef):
            based_on = spec.classes[expected.local_id].based_on
            if snapshot.has_class(based_on) and _related(snapshot, name, based_on):
                return _PathContext("restricted", spec.classes[expected.local_id])
        elif isinstance(expected, UnrestrictedClass):
            if _related(snapshot, name, expected.class_name):
                return _PathContext("vocab", name)
    raise PathError(
        text, f"type filter {name!r} does not match any expected type of the step before"
    )


def _static_type(
    expr: Expression,
    scope: str,
    spec: DomainSpecification,
    snapshot: VocabularySnapshot,
    manifest: dict[str, FunctionSignature],
) -> str:
    if isinstance(expr, Lit):
        if isinstance(expr.value, bool):
            return "boolean"
        if isinstance(expr.value, Decimal):
            return "number"
        return "string"
    if isinstance(expr, PathExpr):
        return check_path(expr.path, scope, spec, snapshot)
    if isinstance(expr, Call):
        signature = manifest.get(expr.function)
        if signature is None:
            raise UnknownFunction(f"unknown function {expr.function!r}")
        if len(expr.args) != signature.arity:
            raise ArityError(
                f"{expr.function} takes {signature.arity} argument(s), got {len(expr.args)}"
            )
        for i, (arg, declared) in enumerate(zip(expr.args, signature.arg_types)):
            actual = _static_type(arg, scope, spec, snapshot, manifest)
            if actual != _MANIFEST_TYPE_TO_STATIC[declared]:
                raise ConditionTypeError(
                    f"{expr.function} argument {i + 1} must be {declared}, got {actual}"
                )
        return _MANIFEST_TYPE_TO_STATIC[signature.result_type]
    if isinstance(expr, Unary):
        operand = _static_type(expr.operand, scope, spec, snapshot, manifest)
        if expr.op == "not":
            if operand != "boolean":
                raise ConditionTypeError(f"'not' needs a boolean, got {operand}")
            return "boolean"
        if operand != "number":
            raise ConditionTypeError(f"unary '-' needs a number, got {operand}")
        return "number"
    left = _static_type(expr.left, scope, spec, snapshot, manifest)
    right = _static_type(expr.right, scope, spec, snapshot, manifest)
    if expr.op in ("and", "or"):
        if left != "boolean" or right != "boolean":
            raise ConditionTypeError(f"{expr.op!r} needs boolean operands")
        return "boolean"
    if expr.op in ("==", "!="):
        if left != right:
            raise ConditionTypeError(
                f"{expr.op!r} needs operands of one kind, got {left} and {right}"
            )
        return "boolean"
    if expr.op in ("<", "<=", ">", ">="):
        if left != "number" or right != "number":
            raise ConditionTypeError(f"{expr.op!r} needs numeric operands")
        return "boolean"
    if left != "number" or right != "number":
        raise ConditionTypeError(f"{expr.op!r} needs numeric operands")
    return "number"


def paths_of_expression(expr: Expression) -> list[PropertyPath]:
    """Distinct paths in first-occurrence order, including call arguments."""
    found: list[PropertyPath] = []

    def walk(node: Expression):
        if isinstance(node, PathExpr):
            if node.path not in found:
                found.append(node.path)
        elif isinstance(node, Unary):
            walk(node.operand)
        elif isinstance(node, Binary):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Call):
            for arg in node.args:
                walk(arg)

    walk(expr)
    return found


def paths_of(rule: Rule) -> set[PropertyPath]:
    """All distinct property paths referenced by the rule's condition."""
    return set(paths_of_expression(rule.condition))


# -- rule set parsing -----------------------------------------------------------------


def compile_rule(
    rule_id: str,
    scope: str,
    condition_source: str,
    message: str,
    severity: str,
    spec: DomainSpecification,
    snapshot: VocabularySnapshot,
    manifest: dict[str, FunctionSignature] | None = None,
) -> Rule:
    """Parse and statically check a single condition-action rule."""
    manifest = manifest if manifest is not None else BUILTIN_SIGNATURES
    if scope not in spec.classes:
        raise UnknownScopeClass(f"scope {scope!r} is not a restricted class of {spec.id!r}")
    condition = parse_condition(condition_source)
    result = _static_type(condition, scope, spec, snapshot, manifest)
    if result != "boolean":
        raise ConditionTypeError(f"condition must be boolean, got {result}")
    distinct = len(paths_of_expression(condition))
    return Rule(
        id=rule_id,
        scope=scope,
        condition=condition,
        action=ShowAction(message=message, severity=severity),
        kind="Global" if distinct >= 2 else "Local",
    )


def parse_rule_set(
    document: bytes | str,
    spec: DomainSpecification,
    snapshot: VocabularySnapshot,
    manifest: dict[str, FunctionSignature] | None = None,
) -> RuleSet:
    """Parse the rule set JSON format and statically check every rule."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ConditionSyntaxError(f"rule set is not valid JSON: {exc.msg}", exc.pos) from exc
    if not isinstance(doc, dict):
        raise SchemaError("", "rule set root must be an object")
    for key in ("id", "domainId", "rules"):
        if key not in doc:
            raise SchemaError("", f"missing required field {key!r}")
    if not isinstance(doc["rules"], list):
        raise SchemaError("rules", "expected a list")

    rules: list[Rule] = []
    seen_ids: set[str] = set()
    for i, raw in enumerate(doc["rules"]):
        rpath = f"rules/{i}"
        if not isinstance(raw, dict):
            raise SchemaError(rpath, "expected an object")
        for key in ("id", "scope", "condition", "message", "severity"):
            if not isinstance(raw.get(key), str) or not raw[key]:
                raise SchemaError(f"{rpath}/{key}", "expected a non-empty string")
        if raw["severity"] not in _SEVERITIES:
            raise SchemaError(
                f"{rpath}/severity", f"expected one of {', '.join(_SEVERITIES)}"
            )
        if raw["id"] in seen_ids:
            raise SchemaError(f"{rpath}/id", f"duplicate rule id {raw['id']!r}")
        seen_ids.add(raw["id"])
        rules.append(
            compile_rule(
                raw["id"], raw["scope"], raw["condition"], raw["message"],
                raw["severity"], spec, snapshot, manifest,
            )
        )
    return RuleSet(id=doc["id"], domain_id=doc["domainId"], rules=tuple(rules))


def rule_set_to_json(rule_set: RuleSet) -> dict:
    return {
        "id": rule_set.id,
        "domainId": rule_set.domain_id,
        "rules": [
            {
                "id": rule.id,
                "scope": rule.scope,
                "condition": format_condition(rule.condition),
                "message": rule.action.message,
                "severity": rule.action.severity,
            }
            for rule in rule_set.rules
        ],
    }


def serialize_rule_set(rule_set: RuleSet) -> bytes:
    """Canonical form matching the domain specification conventions."""
    return (
        json.dumps(rule_set_to_json(rule_set), indent=2, sort_keys=True, ensure_ascii=False)
        + "\n"
    ).encode("utf-8")
