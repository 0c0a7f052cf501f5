"""Independent brute-force checkers used as ground truth in the test suite.

These reimplement the validation semantics from first principles and share
only the data types with the package under test. Keep them boring and
literal; they are the oracle side of the equivalence suites.
"""

from __future__ import annotations

import itertools
import re
from decimal import Decimal

from sdoval.annotation import AnnotationNode, Literal
from sdoval.domain import Primitive, RestrictedRef, UnrestrictedClass
from sdoval.rulelang import Binary, Call, Lit, PathExpr, PropertyStep, Unary

_NUM_RE = re.compile(r"^[+-]?[0-9]+(\.[0-9]+)?([eE][+-]?[0-9]+)?$")
_INT_RE = re.compile(r"^[+-]?[0-9]+$")


def _supers(snapshot, name):
    """Transitive superclasses via a plain worklist walk."""
    out, work = set(), [name]
    while work:
        current = work.pop()
        for parent in snapshot.classes[current].parents:
            if parent not in out:
                out.add(parent)
                work.append(parent)
    return out


def _subclass_eq(snapshot, sub, sup):
    if sub not in snapshot.classes or sup not in snapshot.classes:
        return False
    return sub == sup or sup in _supers(snapshot, sub)


def _literal_ok(datatype, literal):
    kind, lex = literal.kind, literal.lexical
    if datatype == "Text":
        return kind == "string"
    if datatype == "URL":
        return kind == "string" and bool(re.match(r"^https?://[^\s/?#]", lex))
    if datatype in ("Number", "Float"):
        return kind == "number" or (kind == "string" and bool(_NUM_RE.match(lex)))
    if datatype == "Integer":
        return kind in ("number", "string") and bool(_INT_RE.match(lex))
    if datatype == "Boolean":
        return kind == "boolean" or (kind == "string" and lex in ("true", "false"))
    if datatype == "Date":
        if kind != "string" or not re.match(r"^\d{4}-\d{2}-\d{2}$", lex):
            return False
        import datetime

        try:
            datetime.date.fromisoformat(lex)
            return True
        except ValueError:
            return False
    if datatype == "DateTime":
        if kind != "string" or "T" not in lex:
            return False
        import datetime

        try:
            datetime.datetime.fromisoformat(lex.replace("Z", "+00:00"))
            return True
        except ValueError:
            return False
    if datatype == "Time":
        if kind != "string":
            return False
        import datetime

        try:
            datetime.time.fromisoformat(lex)
            return True
        except ValueError:
            return False
    return False


def _value_ok(spec, snapshot, expected, value):
    if isinstance(expected, Primitive):
        return isinstance(value, Literal) and _literal_ok(expected.datatype, value)
    if not isinstance(value, AnnotationNode):
        return False
    if isinstance(expected, UnrestrictedClass):
        if not _subclass_eq(snapshot, value.type_name, expected.class_name):
            return False
        if expected.subclasses is None:
            return True
        return any(_subclass_eq(snapshot, value.type_name, s) for s in expected.subclasses)
    return _subclass_eq(snapshot, value.type_name, spec.classes[expected.local_id].based_on)


def oracle_pick_target(root, spec, snapshot):
    exact = [t for t in spec.targets if spec.classes[t].based_on == root.type_name]
    if exact:
        return exact[0]
    matching = [
        t
        for t in spec.targets
        if _subclass_eq(snapshot, root.type_name, spec.classes[t].based_on)
    ]
    if not matching:
        return None
    best = []
    for t in matching:
        base = spec.classes[t].based_on
        beaten = any(
            spec.classes[o].based_on != base
            and _subclass_eq(snapshot, spec.classes[o].based_on, base)
            for o in matching
        )
        if not beaten:
            best.append(t)
    return best[0]


def oracle_completeness(root, spec, snapshot):
    """The completeness definition applied literally; returns (code, path) pairs."""
    target = oracle_pick_target(root, spec, snapshot)
    if target is None:
        return [("UnknownTargetType", "")]
    found: list[tuple[str, str]] = []

    def recurse(node, rcls, path):
        for prop in rcls.constraints:
            c = rcls.constraints[prop]
            if c.required and prop not in node.properties:
                found.append(("MissingRequiredProperty", f"{path}/{prop}"))
        for prop, values in node.properties.items():
            if prop not in rcls.constraints:
                found.append(("UnspecifiedProperty", f"{path}/{prop}"))
                continue
            c = rcls.constraints[prop]
            if len(values) > 1 and not c.multiple:
                found.append(("CardinalityViolation", f"{path}/{prop}"))
            for value in values:
                matched = None
                for expected in c.expected:
                    if _value_ok(spec, snapshot, expected, value):
                        matched = expected
                        break
                if matched is None:
                    sole = len(c.expected) == 1 and isinstance(c.expected[0], Primitive)
                    compatible = (
                        sole
                        and isinstance(value, Literal)
                        and (
                            (c.expected[0].datatype in ("Number", "Float", "Integer")
                             and value.kind in ("number", "string"))
                            or (c.expected[0].datatype == "Boolean"
                                and value.kind in ("boolean", "string"))
                            or (c.expected[0].datatype
                                in ("Text", "URL", "Date", "DateTime", "Time")
                                and value.kind == "string")
                        )
                    )
                    code = "DatatypeLexicalError" if compatible else "TypeMismatch"
                    found.append((code, f"{path}/{prop}"))
                elif isinstance(matched, RestrictedRef):
                    recurse(value, spec.classes[matched.local_id], f"{path}/{prop}")

    recurse(root, spec.classes[target], "")
    return found


# -- rule evaluation oracle -----------------------------------------------------------


def oracle_resolve(root, path, snapshot):
    items = [root]
    for segment in path.segments:
        nxt = []
        if isinstance(segment, PropertyStep):
            for item in items:
                if isinstance(item, AnnotationNode):
                    nxt.extend(item.properties.get(segment.name, ()))
        else:
            for item in items:
                if isinstance(item, AnnotationNode) and _subclass_eq(
                    snapshot, item.type_name, segment.name
                ):
                    nxt.append(item)
        items = nxt
    out = []
    for item in items:
        if isinstance(item, AnnotationNode):
            out.append(None)  # complex object -> unknown
        elif item.kind == "number":
            out.append(Decimal(item.lexical))
        elif item.kind == "boolean":
            out.append(item.lexical == "true")
        elif _NUM_RE.match(item.lexical):
            out.append(Decimal(item.lexical))
        else:
            out.append(item.lexical)
    return out


def oracle_eval(expr, binding, functions):
    """Plain tri-valued evaluation; None is unknown."""
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, PathExpr):
        return binding[expr.path]
    if isinstance(expr, Call):
        args = [oracle_eval(a, binding, functions) for a in expr.args]
        if any(a is None for a in args):
            return None
        return functions[expr.function](*args)
    if isinstance(expr, Unary):
        value = oracle_eval(expr.operand, binding, functions)
        if expr.op == "not":
            return None if value is None or not isinstance(value, bool) else not value
        if isinstance(value, Decimal):
            return -value
        return None
    assert isinstance(expr, Binary)
    if expr.op in ("and", "or"):
        left = oracle_eval(expr.left, binding, functions)
        right = oracle_eval(expr.right, binding, functions)
        left = left if isinstance(left, bool) else None
        right = right if isinstance(right, bool) else None
        if expr.op == "and":
            if left is False or right is False:
                return False
            if left is True and right is True:
                return True
            return None
        if left is True or right is True:
            return True
        if left is False and right is False:
            return False
        return None
    left = oracle_eval(expr.left, binding, functions)
    right = oracle_eval(expr.right, binding, functions)
    if expr.op in ("==", "!="):
        if left is None or right is None:
            return None
        if isinstance(left, bool) != isinstance(right, bool):
            return False if expr.op == "==" else True
        if isinstance(left, Decimal) != isinstance(right, Decimal):
            # numeric string against number: compare numerically when possible
            num, other = (left, right) if isinstance(left, Decimal) else (right, left)
            if isinstance(other, str) and _NUM_RE.match(other.strip()):
                same = num == Decimal(other.strip())
            else:
                same = False
            return same if expr.op == "==" else not same
        same = left == right
        return same if expr.op == "==" else not same
    # numeric operators
    def as_num(v):
        if isinstance(v, Decimal):
            return v
        if isinstance(v, str) and _NUM_RE.match(v.strip()):
            return Decimal(v.strip())
        return None

    ln, rn = as_num(left), as_num(right)
    if ln is None or rn is None:
        return None
    if expr.op == "<":
        return ln < rn
    if expr.op == "<=":
        return ln <= rn
    if expr.op == ">":
        return ln > rn
    if expr.op == ">=":
        return ln >= rn
    if expr.op == "+":
        return ln + rn
    if expr.op == "-":
        return ln - rn
    if expr.op == "*":
        return ln * rn
    if rn == 0:
        return None
    return ln / rn


def oracle_rule_fires(condition, paths, root, snapshot, functions):
    """Existential check over the full binding product; (fired, any_unknown)."""
    resolved = [oracle_resolve(root, p, snapshot) for p in paths]
    if any(len(values) == 0 for values in resolved):
        return False, False
    any_unknown = False
    for combo in itertools.product(*resolved):
        binding = dict(zip(paths, combo))
        result = oracle_eval(condition, binding, functions)
        if result is True:
            return True, any_unknown
        if result is None:
            any_unknown = True
    return False, any_unknown
