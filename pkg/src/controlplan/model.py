"""Numeric planning problems with control variables.

A problem has propositional fluents, numeric state variables and bounded
numeric control variables. Control variables are not part of the state: an
action is applied together with a valuation ``mu`` of the control variables
it mentions, and its conditions and effects are evaluated under that
valuation. All values are exact ``Fraction``s.
"""

from __future__ import annotations

import enum
from collections import ChainMap
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence, Union

from . import expr as ex
from .expr import Const, Expr, UnboundControlVariable, rational
from .interval import Interval

__all__ = [
    "Action",
    "AtomCondition",
    "Comparator",
    "ControlProblem",
    "ControlVarDecl",
    "Diagnostics",
    "Literal",
    "LinExpr",
    "ModelError",
    "NotApplicable",
    "NumericEffect",
    "PlanStep",
    "State",
    "UnboundControlVariable",
    "UnknownAction",
    "ValidationReport",
    "Violation",
    "applicable",
    "apply",
    "check_controllable_simple",
    "condition",
    "condition_from_exprs",
    "effect",
    "eval_control_expr",
    "holds",
    "is_goal",
    "validate_plan",
]


class ModelError(ValueError):
    """Malformed problem: undeclared identifiers, inconsistent effects, ..."""


class NotApplicable(ModelError):
    pass


class UnknownAction(ModelError):
    pass


class Comparator(enum.Enum):
    GT = ">"
    GEQ = ">="
    EQ = "="

    def test(self, left: Fraction, right: Fraction) -> bool:
        if self is Comparator.GT:
            return left > right
        if self is Comparator.GEQ:
            return left >= right
        return left == right


_FLIP = {"<": Comparator.GT, "<=": Comparator.GEQ}
_DIRECT = {">": Comparator.GT, ">=": Comparator.GEQ, "=": Comparator.EQ, "==": Comparator.EQ}


@dataclass(frozen=True)
class LinExpr:
    """Sparse linear expression ``sum(w_x * x) + constant`` over state variables."""

    coeffs: tuple[tuple[str, Fraction], ...] = ()
    constant: Fraction = Fraction(0)

    def __post_init__(self):
        terms = {}
        for name, w in self.coeffs:
            terms[name] = terms.get(name, Fraction(0)) + rational(w)
        object.__setattr__(
            self, "coeffs", tuple(sorted((k, v) for k, v in terms.items() if v != 0))
        )
        object.__setattr__(self, "constant", rational(self.constant))

    @classmethod
    def of(cls, coeffs: Union[Mapping[str, object], Iterable] = (), constant=0) -> "LinExpr":
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        return cls(tuple(items), constant)

    def coeff(self, name: str) -> Fraction:
        for k, w in self.coeffs:
            if k == name:
                return w
        return Fraction(0)

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(k for k, _ in self.coeffs)

    def value(self, nums: Mapping[str, Fraction]) -> Fraction:
        total = self.constant
        for name, w in self.coeffs:
            total += w * nums[name]
        return total

    def __neg__(self) -> "LinExpr":
        return LinExpr(tuple((k, -w) for k, w in self.coeffs), -self.constant)

    def __str__(self) -> str:
        parts = [f"{w}*{k}" if w != 1 else k for k, w in self.coeffs]
        if self.constant or not parts:
            parts.append(str(self.constant))
        return " + ".join(parts)


@dataclass(frozen=True)
class AtomCondition:
    """Atomic numeric condition ``lhs op rhs``.

    ``lhs`` is linear in the state variables with a zero constant; ``rhs``
    carries every control-variable term and every constant. Build instances
    with :func:`condition`, which performs that normalization.
    """

    lhs: LinExpr
    op: Comparator
    rhs: Expr

    def __str__(self) -> str:
        return f"{self.lhs} {self.op.value} {ex.to_text(self.rhs)}"


def condition(lhs, op: Union[str, Comparator], rhs) -> AtomCondition:
    """Normalize ``lhs op rhs`` with ``lhs`` linear over state variables.

    ``<`` and ``<=`` are turned into ``>``/``>=`` by negating both sides, and
    the constant of ``lhs`` is moved to the right-hand side.
    """
    if not isinstance(lhs, LinExpr):
        lhs = LinExpr.of(lhs)
    if not isinstance(rhs, (Const, ex.Var, ex.Add, ex.Sub, ex.Mul)):
        rhs = Const(rhs)
    if isinstance(op, Comparator):
        cmp = op
    elif op in _FLIP:
        cmp = _FLIP[op]
        lhs, rhs = -lhs, ex.negate(rhs)
    elif op in _DIRECT:
        cmp = _DIRECT[op]
    else:
        raise ModelError(f"unknown comparator {op!r}")
    rhs = ex.shift(rhs, -lhs.constant)
    return AtomCondition(LinExpr(lhs.coeffs), cmp, rhs)


def condition_from_exprs(lhs: Expr, op: str, rhs: Expr, state_vars) -> AtomCondition:
    """Build a condition from two arbitrary trees, moving state terms left."""
    left = ex.split_linear(lhs, state_vars)
    right = ex.split_linear(rhs, state_vars)
    if left is None or right is None:
        raise ModelError(
            f"condition {ex.to_text(lhs)} {op} {ex.to_text(rhs)} is not linear in the state variables"
        )
    (lc, lr), (rc, rr) = left, right
    coeffs = dict(lc)
    for name, w in rc.items():
        coeffs[name] = coeffs.get(name, Fraction(0)) - w
    return condition(LinExpr.of(coeffs), op, ex._combine(ex.Sub, rr, lr))


class Literal(NamedTuple):
    fluent: str
    positive: bool = True

    def __str__(self) -> str:
        return self.fluent if self.positive else f"not {self.fluent}"


def as_literal(value) -> Literal:
    if isinstance(value, Literal):
        return value
    if isinstance(value, str):
        return Literal(value)
    return Literal(*value)


@dataclass(frozen=True)
class NumericEffect:
    """``var += expr`` when ``additive``, otherwise ``var := expr``."""

    var: str
    expr: Expr
    additive: bool = True

    def __str__(self) -> str:
        return f"{self.var} {'+=' if self.additive else ':='} {ex.to_text(self.expr)}"


def effect(var: str, expr: Expr, additive: bool = True, state_vars=()) -> NumericEffect:
    """Build an effect, rewriting ``x := x + xi`` as ``x += xi`` when ``xi`` is state-free."""
    if not additive:
        split = ex.split_linear(expr, state_vars)
        if split is not None:
            coeffs, rest = split
            if coeffs == {var: 1}:
                return NumericEffect(var, rest, True)
    return NumericEffect(var, expr, additive)


@dataclass(frozen=True)
class Action:
    name: str
    pre_b: tuple[Literal, ...] = ()
    pre_q: tuple[AtomCondition, ...] = ()
    add: frozenset[str] = frozenset()
    delete: frozenset[str] = frozenset()
    eff_q: tuple[NumericEffect, ...] = ()
    cost: Fraction = Fraction(1)
    expr_vars: tuple[str, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "pre_b", tuple(map(as_literal, self.pre_b)))
        object.__setattr__(self, "pre_q", tuple(self.pre_q))
        object.__setattr__(self, "add", frozenset(self.add))
        object.__setattr__(self, "delete", frozenset(self.delete))
        object.__setattr__(self, "eff_q", tuple(self.eff_q))
        object.__setattr__(self, "cost", rational(self.cost))
        if self.cost < 0:
            raise ModelError(f"action {self.name}: negative cost")
        if self.add & self.delete:
            raise ModelError(f"action {self.name}: fluents both added and deleted: {sorted(self.add & self.delete)}")
        targets = [e.var for e in self.eff_q]
        if len(targets) != len(set(targets)):
            raise ModelError(f"action {self.name}: more than one assignment to the same variable")
        # every variable referenced by a condition right-hand side or an effect;
        # ControlProblem filters this down to declared control variables
        names = set()
        for c in self.pre_q:
            names |= ex.variables(c.rhs)
        for e in self.eff_q:
            names |= ex.variables(e.expr)
        object.__setattr__(self, "expr_vars", tuple(sorted(names)))


@dataclass(frozen=True)
class ControlVarDecl:
    name: str
    domain: Interval
    step: Optional[Fraction] = None

    def __post_init__(self):
        if self.step is not None:
            step = rational(self.step)
            if step <= 0:
                raise ModelError(f"control variable {self.name}: step must be positive")
            if (self.domain.width / step).denominator != 1:
                raise ModelError(f"control variable {self.name}: step {step} does not divide {self.domain}")
            object.__setattr__(self, "step", step)

    @property
    def kind(self) -> str:
        return "continuous" if self.step is None else "discrete"

    @property
    def grid_size(self) -> int:
        if self.step is None:
            raise ModelError(f"control variable {self.name} is continuous")
        return int(self.domain.width / self.step) + 1

    def grid(self) -> list[Fraction]:
        return [self.domain.lo + k * self.step for k in range(self.grid_size)]

    def admits(self, value: Fraction) -> bool:
        if value not in self.domain:
            return False
        if self.step is None:
            return True
        return ((value - self.domain.lo) / self.step).denominator == 1


class State:
    """Immutable valuation of fluents (the true ones) and numeric variables."""

    __slots__ = ("props", "nums", "_key", "_hash")

    def __init__(self, props: Iterable[str] = (), nums: Optional[Mapping[str, object]] = None):
        self.props = frozenset(props)
        self.nums = MappingProxyType({k: rational(v) for k, v in (nums or {}).items()})
        self._key = (self.props, frozenset(self.nums.items()))
        self._hash = hash(self._key)

    def __eq__(self, other):
        return isinstance(other, State) and self._key == other._key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        nums = ", ".join(f"{k}={v}" for k, v in sorted(self.nums.items()))
        props = ", ".join(sorted(self.props))
        return f"State({{{props}}}, {{{nums}}})"


class PlanStep(NamedTuple):
    action: str
    mu: Mapping[str, Fraction]


@dataclass(frozen=True)
class ControlProblem:
    fluents: tuple[str, ...]
    state_vars: tuple[str, ...]
    control_vars: tuple[ControlVarDecl, ...]
    actions: tuple[Action, ...]
    init: State
    goal_b: tuple[Literal, ...] = ()
    goal_q: tuple[AtomCondition, ...] = ()
    name: str = "problem"

    def __post_init__(self):
        for attr in ("fluents", "state_vars", "control_vars", "actions", "goal_q"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        object.__setattr__(self, "goal_b", tuple(map(as_literal, self.goal_b)))
        self._check_declarations()

    def _check_declarations(self):
        fluents, xs = set(self.fluents), set(self.state_vars)
        us = {u.name for u in self.control_vars}
        names = list(self.fluents) + list(self.state_vars) + [u.name for u in self.control_vars]
        if len(names) != len(set(names)):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise ModelError(f"identifiers declared more than once: {dup}")
        actions = [a.name for a in self.actions]
        if len(actions) != len(set(actions)):
            raise ModelError("duplicate action names")
        problems = []

        def need(kind, name, pool, where):
            if name not in pool:
                problems.append(f"{where}: undeclared {kind} {name!r}")

        for a in self.actions:
            for l in a.pre_b:
                need("fluent", l.fluent, fluents, a.name)
            for f in a.add | a.delete:
                need("fluent", f, fluents, a.name)
            for c in a.pre_q:
                for x in c.lhs.variables:
                    need("state variable", x, xs, a.name)
                for v in ex.variables(c.rhs):
                    need("variable", v, xs | us, a.name)
            for e in a.eff_q:
                need("state variable", e.var, xs, a.name)
                for v in ex.variables(e.expr):
                    need("variable", v, xs | us, a.name)
        for l in self.goal_b:
            need("fluent", l.fluent, fluents, "goal")
        for c in self.goal_q:
            for x in c.lhs.variables:
                need("state variable", x, xs, "goal")
            for v in ex.variables(c.rhs):
                need("variable", v, xs | us, "goal")
        for f in self.init.props:
            need("fluent", f, fluents, "init")
        if set(self.init.nums) != xs:
            problems.append(
                f"init: numeric valuation must cover exactly {sorted(xs)}, got {sorted(self.init.nums)}"
            )
        if problems:
            raise ModelError("; ".join(problems))

    @property
    def domains(self) -> dict[str, Interval]:
        return {u.name: u.domain for u in self.control_vars}

    def decl(self, name: str) -> ControlVarDecl:
        for u in self.control_vars:
            if u.name == name:
                return u
        raise KeyError(name)

    def action(self, name: str) -> Action:
        for a in self.actions:
            if a.name == name:
                return a
        raise UnknownAction(name)

    def action_controls(self, action: Action) -> tuple[str, ...]:
        """Declared control variables that ``action`` mentions."""
        us = {u.name for u in self.control_vars}
        return tuple(v for v in action.expr_vars if v in us)


# -- semantics -------------------------------------------------------------


def eval_control_expr(expr: Expr, mu: Mapping[str, Fraction]) -> Fraction:
    return ex.evaluate(expr, mu)


def holds(state: State, cond: Union[AtomCondition, Literal], mu: Mapping[str, Fraction] = MappingProxyType({})) -> bool:
    if isinstance(cond, Literal):
        return (cond.fluent in state.props) == cond.positive
    left = cond.lhs.value(state.nums)
    right = ex.evaluate(cond.rhs, ChainMap(mu, state.nums) if mu else state.nums)
    return cond.op.test(left, right)


def applicable(state: State, action: Action, mu: Mapping[str, Fraction] = MappingProxyType({})) -> bool:
    return all(holds(state, l) for l in action.pre_b) and all(
        holds(state, c, mu) for c in action.pre_q
    )


def apply(state: State, action: Action, mu: Mapping[str, Fraction] = MappingProxyType({}), check: bool = True) -> State:
    if check and not applicable(state, action, mu):
        raise NotApplicable(f"{action.name} is not applicable in {state!r} under {dict(mu)}")
    nums = dict(state.nums)
    env = ChainMap(mu, state.nums)
    for e in action.eff_q:
        value = ex.evaluate(e.expr, env)
        nums[e.var] = state.nums[e.var] + value if e.additive else value
    props = (state.props - action.delete) | action.add
    return State(props, nums)


def is_goal(state: State, problem) -> bool:
    return all(holds(state, l) for l in problem.goal_b) and all(
        holds(state, c) for c in problem.goal_q
    )


def domain_violation(problem: ControlProblem, action: Action, mu: Mapping[str, Fraction]) -> Optional[str]:
    """Why ``mu`` is not an admissible valuation for ``action``, or None."""
    needed = set(problem.action_controls(action))
    if set(mu) != needed:
        return f"valuation covers {sorted(mu)}, action needs {sorted(needed)}"
    for name, value in mu.items():
        if not problem.decl(name).admits(value):
            return f"{name}={value} outside {problem.decl(name).domain}"
    return None


@dataclass
class ValidationReport:
    valid: bool
    solution: bool
    failed_step: Optional[int]
    reason: Optional[str]
    detail: str
    final_state: State


def validate_plan(problem: ControlProblem, plan: Sequence[PlanStep]) -> ValidationReport:
    """Replay ``plan`` from the initial state.

    ``valid`` means every step was applicable in sequence; ``solution``
    additionally requires the final state to satisfy the goal. ``reason`` is
    one of ``DomainViolation``, ``PreconditionViolation`` or
    ``GoalNotReached``.
    """
    state = problem.init
    for i, (name, mu) in enumerate(plan):
        action = problem.action(name)
        mu = {k: rational(v) for k, v in mu.items()}
        why = domain_violation(problem, action, mu)
        if why is not None:
            return ValidationReport(False, False, i, "DomainViolation", why, state)
        if not applicable(state, action, mu):
            return ValidationReport(
                False, False, i, "PreconditionViolation", f"{name} not applicable", state
            )
        state = apply(state, action, mu, check=False)
    if not is_goal(state, problem):
        return ValidationReport(True, False, None, "GoalNotReached", "final state misses the goal", state)
    return ValidationReport(True, True, None, None, "", state)


# -- fragment check ----------------------------------------------------------


class Violation(NamedTuple):
    kind: str
    where: str
    detail: str


@dataclass
class Diagnostics:
    violations: list[Violation] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def __str__(self) -> str:
        if self.accepted:
            return "controllable simple"
        return "\n".join(f"{v.kind} at {v.where}: {v.detail}" for v in self.violations)


def condition_variables(problem: ControlProblem) -> frozenset[str]:
    """State variables that occur in some precondition or goal atom."""
    xs = set(problem.state_vars)
    seen = set()
    for c in list(problem.goal_q) + [c for a in problem.actions for c in a.pre_q]:
        seen |= c.lhs.variables
        seen |= ex.variables(c.rhs) & xs
    return frozenset(seen)


def check_controllable_simple(problem: ControlProblem) -> Diagnostics:
    """Report every construct outside the controllable simple fragment."""
    diag = Diagnostics()
    xs = set(problem.state_vars)
    us = {u.name for u in problem.control_vars}

    def check_atom(c: AtomCondition, where: str, goal: bool):
        if c.op is Comparator.EQ:
            diag.violations.append(Violation("DisallowedComparator", where, f"{c}: only > and >= are allowed"))
        rhs_vars = ex.variables(c.rhs)
        if rhs_vars & xs:
            diag.violations.append(Violation("NonLinearCondition", where, f"{c}: state variables on the control side"))
        if goal and rhs_vars & us:
            diag.violations.append(Violation("ControlInGoal", where, f"{c}: goals may not mention control variables"))

    for a in problem.actions:
        for i, c in enumerate(a.pre_q):
            check_atom(c, f"{a.name}.pre_q[{i}]", False)
    for i, c in enumerate(problem.goal_q):
        check_atom(c, f"goal[{i}]", True)

    relevant = condition_variables(problem)
    for a in problem.actions:
        for i, e in enumerate(a.eff_q):
            if e.var not in relevant:
                continue
            if not e.additive or ex.variables(e.expr) & xs:
                diag.violations.append(
                    Violation("NonAdditiveEffect", f"{a.name}.eff_q[{i}]", f"{e}: must be {e.var} += <control expression>")
                )
    return diag
