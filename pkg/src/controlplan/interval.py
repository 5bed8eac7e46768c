"""Closed interval arithmetic over the rationals.

Only the three closed operations (sum, difference, product) are provided;
there is no division. ``dom_of`` folds them over an expression tree, so an
expression in which a variable occurs twice is over-approximated (``u - u``
evaluates to ``[lo - hi, hi - lo]``, not ``[0, 0]``).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .expr import Add, Const, Expr, Mul, Sub, UnboundControlVariable, Var, rational


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = rational(self.lo), rational(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, value) -> "Interval":
        return cls(value, value)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, value) -> bool:
        return self.lo <= value <= self.hi

    def __add__(self, other: "Interval") -> "Interval":
        return iv_add(self, other)

    def __sub__(self, other: "Interval") -> "Interval":
        return iv_sub(self, other)

    def __mul__(self, other: "Interval") -> "Interval":
        return iv_mul(self, other)

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def iv_add(a: Interval, b: Interval) -> Interval:
    return Interval(a.lo + b.lo, a.hi + b.hi)


def iv_sub(a: Interval, b: Interval) -> Interval:
    return Interval(a.lo - b.hi, a.hi - b.lo)


def iv_mul(a: Interval, b: Interval) -> Interval:
    products = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
    return Interval(min(products), max(products))


def dom_of(expr: Expr, domains: Mapping[str, Interval]) -> Interval:
    """Interval of values ``expr`` can take when each variable ranges over its domain."""
    if isinstance(expr, Const):
        return Interval.point(expr.value)
    if isinstance(expr, Var):
        try:
            return domains[expr.name]
        except KeyError:
            raise UnboundControlVariable(expr.name) from None
    left = dom_of(expr.left, domains)
    right = dom_of(expr.right, domains)
    if isinstance(expr, Add):
        return iv_add(left, right)
    if isinstance(expr, Sub):
        return iv_sub(left, right)
    if isinstance(expr, Mul):
        return iv_mul(left, right)
    raise TypeError(f"not an expression: {expr!r}")
