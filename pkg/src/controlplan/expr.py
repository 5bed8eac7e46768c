"""Arithmetic expression trees over state and control variables.

Expressions are immutable and hashable, so they can be used as dictionary
keys and compared structurally. Evaluation is exact over ``Fraction``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

Number = Union[int, Fraction, str]


class UnboundControlVariable(KeyError):
    """A variable leaf has no value in the supplied environment."""

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"unbound variable {self.name!r}"


def rational(value: Number) -> Fraction:
    """Convert ints, Fractions and "p/q" / decimal strings to a Fraction.

    Floats are rejected so that no binary rounding sneaks into the model.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, float):
        raise TypeError(f"refusing float {value!r}; pass a string or Fraction")
    return Fraction(value)


@dataclass(frozen=True)
class Const:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", rational(self.value))


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Var, Add, Sub, Mul]

BINARY = {"add": Add, "sub": Sub, "mul": Mul}


def variables(expr: Expr) -> frozenset[str]:
    if isinstance(expr, Const):
        return frozenset()
    if isinstance(expr, Var):
        return frozenset((expr.name,))
    return variables(expr.left) | variables(expr.right)


def evaluate(expr: Expr, env: Mapping[str, Fraction]) -> Fraction:
    """Exact value of ``expr`` with variables looked up in ``env``."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Var):
        try:
            return env[expr.name]
        except KeyError:
            raise UnboundControlVariable(expr.name) from None
    left = evaluate(expr.left, env)
    right = evaluate(expr.right, env)
    if isinstance(expr, Add):
        return left + right
    if isinstance(expr, Sub):
        return left - right
    return left * right


def negate(expr: Expr) -> Expr:
    if isinstance(expr, Const):
        return Const(-expr.value)
    return Mul(Const(-1), expr)


def shift(expr: Expr, delta: Fraction) -> Expr:
    """``expr + delta``, folding constants where possible."""
    if delta == 0:
        return expr
    if isinstance(expr, Const):
        return Const(expr.value + delta)
    if delta < 0:
        return Sub(expr, Const(-delta))
    return Add(expr, Const(delta))


def split_linear(expr: Expr, state_vars) -> tuple[dict[str, Fraction], Expr] | None:
    """Split ``expr`` into a linear part over ``state_vars`` plus a remainder.

    Returns ``(coeffs, rest)`` where ``rest`` mentions no state variable, or
    None when the expression is not linear in the state variables (a product
    of two state-dependent factors, or a state variable scaled by a control
    variable).
    """
    if isinstance(expr, Const):
        return {}, expr
    if isinstance(expr, Var):
        if expr.name in state_vars:
            return {expr.name: Fraction(1)}, Const(0)
        return {}, expr
    left = split_linear(expr.left, state_vars)
    right = split_linear(expr.right, state_vars)
    if left is None or right is None:
        return None
    (lc, lr), (rc, rr) = left, right
    if isinstance(expr, (Add, Sub)):
        sign = 1 if isinstance(expr, Add) else -1
        coeffs = dict(lc)
        for name, w in rc.items():
            coeffs[name] = coeffs.get(name, Fraction(0)) + sign * w
        coeffs = {k: v for k, v in coeffs.items() if v != 0}
        return coeffs, _combine(type(expr), lr, rr)
    # product: at most one factor may depend on the state, and it must be
    # scaled by a plain constant
    if lc and rc:
        return None
    if not lc and not rc:
        return {}, _combine(Mul, lr, rr)
    coeffs, rest, scale = (lc, lr, rr) if lc else (rc, rr, lr)
    if not isinstance(scale, Const):
        return None
    k = scale.value
    coeffs = {name: w * k for name, w in coeffs.items() if w * k != 0}
    return coeffs, _combine(Mul, rest, scale)


def _combine(kind: type, left: Expr, right: Expr) -> Expr:
    """Build ``kind(left, right)``, folding constant operands."""
    if isinstance(left, Const) and isinstance(right, Const):
        return Const(evaluate(kind(left, right), {}))
    if kind is Add:
        if isinstance(right, Const) and right.value == 0:
            return left
        if isinstance(left, Const) and left.value == 0:
            return right
    elif kind is Sub:
        if isinstance(right, Const) and right.value == 0:
            return left
    elif kind is Mul:
        if isinstance(left, Const) and left.value == 1:
            return right
        if isinstance(right, Const) and right.value == 1:
            return left
    return kind(left, right)


def to_text(expr: Expr) -> str:
    if isinstance(expr, Const):
        return str(expr.value)
    if isinstance(expr, Var):
        return expr.name
    sym = {Add: "+", Sub: "-", Mul: "*"}[type(expr)]
    return f"({to_text(expr.left)} {sym} {to_text(expr.right)})"
