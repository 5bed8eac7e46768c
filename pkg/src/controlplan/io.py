"""JSON problem and plan documents.

Rationals are written as integers or ``"p/q"`` strings; on input, integers,
``"p/q"`` and decimal strings are accepted. Floats are refused so that no
value is silently rounded. Control expressions are ``{"op": ..., "args":
[...]}`` trees with ``op`` in ``const``, ``var``, ``add``, ``sub``, ``mul``;
a bare number or rational string is shorthand for a constant and a bare
identifier for a variable.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Union

from . import expr as ex
from .compilation import SimpleProblem
from .expr import Add, Const, Mul, Sub, Var
from .interval import Interval
from .model import (
    Action,
    AtomCondition,
    ControlProblem,
    ControlVarDecl,
    LinExpr,
    Literal,
    ModelError,
    NumericEffect,
    PlanStep,
    State,
    condition,
    condition_from_exprs,
    effect,
)

FORMAT_VERSION = 1


class ParseError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.message = message


# -- encoding ------------------------------------------------------------------


def rational_to_json(value: Fraction) -> Union[int, str]:
    value = Fraction(value)
    return value.numerator if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def expr_to_json(e: ex.Expr) -> dict:
    if isinstance(e, Const):
        return {"op": "const", "args": [rational_to_json(e.value)]}
    if isinstance(e, Var):
        return {"op": "var", "args": [e.name]}
    op = {Add: "add", Sub: "sub", Mul: "mul"}[type(e)]
    return {"op": op, "args": [expr_to_json(e.left), expr_to_json(e.right)]}


def lin_to_json(lin: LinExpr) -> dict:
    return {
        "coeffs": {k: rational_to_json(w) for k, w in lin.coeffs},
        "constant": rational_to_json(lin.constant),
    }


def condition_to_json(c: AtomCondition) -> dict:
    return {"lhs": lin_to_json(c.lhs), "op": c.op.value, "rhs": expr_to_json(c.rhs)}


def effect_to_json(e: NumericEffect) -> dict:
    return {"var": e.var, ("addend" if e.additive else "assign"): expr_to_json(e.expr)}


def problem_to_dict(problem: ControlProblem) -> dict:
    return {
        "format": FORMAT_VERSION,
        "name": problem.name,
        "fluents": list(problem.fluents),
        "state_vars": list(problem.state_vars),
        "control_vars": [
            {
                "name": u.name,
                "lo": rational_to_json(u.domain.lo),
                "hi": rational_to_json(u.domain.hi),
                "kind": u.kind,
                **({"step": rational_to_json(u.step)} if u.step is not None else {}),
            }
            for u in problem.control_vars
        ],
        "actions": [
            {
                "name": a.name,
                "cost": rational_to_json(a.cost),
                "pre_b": [str(l) for l in a.pre_b],
                "pre_q": [condition_to_json(c) for c in a.pre_q],
                "eff_b_add": sorted(a.add),
                "eff_b_del": sorted(a.delete),
                "eff_q": [effect_to_json(e) for e in a.eff_q],
            }
            for a in problem.actions
        ],
        "init": {
            "props": sorted(problem.init.props),
            "nums": {x: rational_to_json(problem.init.nums[x]) for x in problem.state_vars},
        },
        "goal": {
            "props": [str(l) for l in problem.goal_b],
            "nums": [condition_to_json(c) for c in problem.goal_q],
        },
    }


def simple_to_control(sp: SimpleProblem) -> ControlProblem:
    """View a compiled problem as a control problem without control variables."""
    actions = tuple(
        Action(
            name=a.name,
            pre_b=a.pre_b,
            pre_q=tuple(condition(p.lhs, p.op, p.bound) for p in a.pre_q),
            add=a.add,
            delete=a.delete,
            eff_q=tuple(NumericEffect(var, Const(k)) for var, k in a.eff_q),
            cost=a.cost,
        )
        for a in sp.actions
    )
    return ControlProblem(
        sp.fluents, sp.state_vars, (), actions, sp.init, sp.goal_b,
        tuple(condition(g.lhs, g.op, g.bound) for g in sp.goal_q), sp.name,
    )


def dump_problem(problem: Union[ControlProblem, SimpleProblem], path=None) -> str:
    if isinstance(problem, SimpleProblem):
        problem = simple_to_control(problem)
    text = json.dumps(problem_to_dict(problem), indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


# -- decoding ------------------------------------------------------------------


def rational_from_json(value: Any, path: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ParseError(path, f"expected an integer or 'p/q' string, got {value!r}")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise ParseError(path, f"not a rational: {value!r}") from None


def _looks_rational(text: str) -> bool:
    try:
        Fraction(text)
    except (ValueError, ZeroDivisionError):
        return False
    return True


def expr_from_json(obj: Any, path: str, known) -> ex.Expr:
    if isinstance(obj, int) and not isinstance(obj, bool):
        return Const(obj)
    if isinstance(obj, str):
        if _looks_rational(obj):
            return Const(Fraction(obj))
        if obj not in known:
            raise ParseError(path, f"undeclared variable {obj!r}")
        return Var(obj)
    if not isinstance(obj, dict) or "op" not in obj:
        raise ParseError(path, f"expected an expression, got {obj!r}")
    op, args = obj["op"], obj.get("args", [])
    if not isinstance(args, list):
        raise ParseError(path, "args must be a list")
    if op == "const":
        if len(args) != 1:
            raise ParseError(path, "const takes one argument")
        return Const(rational_from_json(args[0], f"{path}.args[0]"))
    if op == "var":
        if len(args) != 1 or not isinstance(args[0], str):
            raise ParseError(path, "var takes one identifier")
        if args[0] not in known:
            raise ParseError(path, f"undeclared variable {args[0]!r}")
        return Var(args[0])
    if op == "div":
        raise ParseError(path, "division is not supported in control expressions")
    if op not in ex.BINARY:
        raise ParseError(path, f"unknown operator {op!r}")
    if len(args) < 2:
        raise ParseError(path, f"{op} takes at least two arguments")
    parts = [expr_from_json(a, f"{path}.args[{i}]", known) for i, a in enumerate(args)]
    node = ex.BINARY[op](parts[0], parts[1])
    for p in parts[2:]:
        node = ex.BINARY[op](node, p)
    return node


def _lin_from_json(obj: dict, path: str, xs) -> LinExpr:
    coeffs = obj.get("coeffs", {})
    if not isinstance(coeffs, dict):
        raise ParseError(path, "coeffs must be an object")
    for name in coeffs:
        if name not in xs:
            raise ParseError(f"{path}.coeffs", f"undeclared state variable {name!r}")
    return LinExpr.of(
        {k: rational_from_json(v, f"{path}.coeffs.{k}") for k, v in coeffs.items()},
        rational_from_json(obj.get("constant", 0), f"{path}.constant"),
    )


def condition_from_json(obj: Any, path: str, xs, us) -> AtomCondition:
    if not isinstance(obj, dict):
        raise ParseError(path, "condition must be an object")
    if "or" in obj or "any" in obj:
        raise ParseError(path, "disjunctive conditions are not supported")
    for key in ("lhs", "op", "rhs"):
        if key not in obj:
            raise ParseError(path, f"missing {key!r}")
    op = obj["op"]
    if op not in (">", ">=", "<", "<=", "=", "=="):
        raise ParseError(f"{path}.op", f"unknown comparator {op!r}")
    rhs = expr_from_json(obj["rhs"], f"{path}.rhs", set(xs) | set(us))
    lhs = obj["lhs"]
    try:
        if isinstance(lhs, dict) and "coeffs" in lhs:
            return condition(_lin_from_json(lhs, f"{path}.lhs", xs), op, rhs)
        tree = expr_from_json(lhs, f"{path}.lhs", set(xs) | set(us))
        return condition_from_exprs(tree, op, rhs, set(xs))
    except ModelError as err:
        raise ParseError(path, str(err)) from None


def _literal_from_json(obj: Any, path: str, fluents) -> Literal:
    if not isinstance(obj, str):
        raise ParseError(path, "literal must be a string such as 'p' or 'not p'")
    text = obj.strip()
    positive = True
    if text.startswith("not "):
        positive, text = False, text[4:].strip()
    if text not in fluents:
        raise ParseError(path, f"undeclared fluent {text!r}")
    return Literal(text, positive)


def _names(doc: dict, key: str) -> list[str]:
    value = doc.get(key, [])
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ParseError(key, "expected a list of identifiers")
    return value


def problem_from_dict(doc: dict) -> ControlProblem:
    if not isinstance(doc, dict):
        raise ParseError("", "problem document must be a JSON object")
    fluents = _names(doc, "fluents")
    xs = _names(doc, "state_vars")
    decls = []
    for i, u in enumerate(doc.get("control_vars", [])):
        path = f"control_vars[{i}]"
        if not isinstance(u, dict) or "name" not in u:
            raise ParseError(path, "expected an object with a name")
        kind = u.get("kind", "continuous")
        if kind not in ("continuous", "discrete"):
            raise ParseError(f"{path}.kind", f"unknown kind {kind!r}")
        lo = rational_from_json(u.get("lo"), f"{path}.lo")
        hi = rational_from_json(u.get("hi"), f"{path}.hi")
        step = None
        if kind == "discrete":
            step = rational_from_json(u.get("step", 1), f"{path}.step")
        try:
            decls.append(ControlVarDecl(u["name"], Interval(lo, hi), step))
        except (ModelError, ValueError) as err:
            raise ParseError(path, str(err)) from None
    us = [d.name for d in decls]
    known = set(xs) | set(us)

    actions = []
    for i, a in enumerate(doc.get("actions", [])):
        path = f"actions[{i}]"
        if not isinstance(a, dict) or "name" not in a:
            raise ParseError(path, "expected an object with a name")
        effects = []
        for j, e in enumerate(a.get("eff_q", [])):
            epath = f"{path}.eff_q[{j}]"
            if not isinstance(e, dict) or "var" not in e:
                raise ParseError(epath, "expected an object with 'var'")
            if e["var"] not in xs:
                raise ParseError(f"{epath}.var", f"undeclared state variable {e['var']!r}")
            if "addend" in e:
                effects.append(effect(e["var"], expr_from_json(e["addend"], f"{epath}.addend", known)))
            elif "assign" in e:
                tree = expr_from_json(e["assign"], f"{epath}.assign", known)
                effects.append(effect(e["var"], tree, additive=False, state_vars=set(xs)))
            else:
                raise ParseError(epath, "needs 'addend' or 'assign'")
        try:
            actions.append(
                Action(
                    name=a["name"],
                    pre_b=[_literal_from_json(l, f"{path}.pre_b[{j}]", fluents) for j, l in enumerate(a.get("pre_b", []))],
                    pre_q=[condition_from_json(c, f"{path}.pre_q[{j}]", xs, us) for j, c in enumerate(a.get("pre_q", []))],
                    add=a.get("eff_b_add", []),
                    delete=a.get("eff_b_del", []),
                    eff_q=effects,
                    cost=rational_from_json(a.get("cost", 1), f"{path}.cost"),
                )
            )
        except ModelError as err:
            raise ParseError(path, str(err)) from None

    init, goal = doc.get("init", {}), doc.get("goal", {})
    for key, value in (("init", init), ("goal", goal)):
        if not isinstance(value, dict):
            raise ParseError(key, "expected an object with 'props' and 'nums'")
    nums = {k: rational_from_json(v, f"init.nums.{k}") for k, v in init.get("nums", {}).items()}
    try:
        return ControlProblem(
            fluents=tuple(fluents),
            state_vars=tuple(xs),
            control_vars=tuple(decls),
            actions=tuple(actions),
            init=State(init.get("props", []), nums),
            goal_b=tuple(_literal_from_json(l, f"goal.props[{j}]", fluents) for j, l in enumerate(goal.get("props", []))),
            goal_q=tuple(condition_from_json(c, f"goal.nums[{j}]", xs, us) for j, c in enumerate(goal.get("nums", []))),
            name=doc.get("name", "problem"),
        )
    except ModelError as err:
        raise ParseError("", str(err)) from None


def parse_problem(document: Union[str, dict]) -> ControlProblem:
    """Parse a problem from a JSON string or an already-decoded object."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as err:
            raise ParseError(f"line {err.lineno} column {err.colno}", err.msg) from None
    return problem_from_dict(document)


def load_problem(path) -> ControlProblem:
    try:
        return parse_problem(Path(path).read_text())
    except ParseError as err:
        raise ParseError(f"{path}: {err.path}" if err.path else str(path), err.message) from None


# -- plans ---------------------------------------------------------------------


def plan_to_dict(plan, problem_name: str = "") -> dict:
    return {
        "problem": problem_name,
        "steps": [
            {"action": step.action, "mu": {k: rational_to_json(v) for k, v in sorted(step.mu.items())}}
            for step in plan
        ],
    }


def plan_from_dict(doc: dict) -> list[PlanStep]:
    if not isinstance(doc, dict) or not isinstance(doc.get("steps"), list):
        raise ParseError("", "plan document needs a 'steps' list")
    steps = []
    for i, s in enumerate(doc["steps"]):
        if not isinstance(s, dict) or "action" not in s:
            raise ParseError(f"steps[{i}]", "expected an object with 'action'")
        mu = {k: rational_from_json(v, f"steps[{i}].mu.{k}") for k, v in s.get("mu", {}).items()}
        steps.append(PlanStep(s["action"], mu))
    return steps


def dump_plan(plan, path=None, problem_name: str = "") -> str:
    text = json.dumps(plan_to_dict(plan, problem_name), indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def load_plan(path) -> list[PlanStep]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise ParseError(f"{path}: line {err.lineno} column {err.colno}", err.msg) from None
    return plan_from_dict(doc)
