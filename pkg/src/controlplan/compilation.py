"""Compile controllable simple problems into simple numeric problems.

Two compilations are provided. :func:`optimistic_compile` replaces every
control-dependent effect by each endpoint of its interval, producing up to
``2**k`` constant-effect variants per action. :func:`signature_compile` only
keeps, for each action, the variants that maximise the net effect on some
relevant numeric condition, which bounds the result by ``|A| * |Psi|``.

In both, a precondition ``lhs > xi_U`` becomes ``lhs > lo(Dom(xi_U))``, the
weakest bound any control valuation can produce.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence, Union

from . import expr as ex
from .interval import Interval, dom_of
from .model import (
    Action,
    AtomCondition,
    Comparator,
    ControlProblem,
    Diagnostics,
    LinExpr,
    Literal,
    ModelError,
    NumericEffect,
    State,
    check_controllable_simple,
)

DEFAULT_MAX_ACTIONS = 2**20


class FragmentViolation(ModelError):
    def __init__(self, diagnostics: Diagnostics):
        super().__init__(f"problem is not controllable simple:\n{diagnostics}")
        self.diagnostics = diagnostics


class CompilationTooLarge(ModelError):
    pass


class _Irrelevant(enum.Enum):
    IRRELEVANT = "IRR"

    def __repr__(self) -> str:
        return "IRR"

    __str__ = __repr__


#: Signature entry for an effect whose variable has a zero coefficient.
IRRELEVANT = _Irrelevant.IRRELEVANT

Entry = Union[Fraction, _Irrelevant]
Signature = tuple  # tuple[Entry, ...] aligned with the action's compiled effects


class SimpleAtom(NamedTuple):
    """Control-free condition ``lhs op bound``."""

    lhs: LinExpr
    op: Comparator
    bound: Fraction

    def holds(self, nums) -> bool:
        return self.op.test(self.lhs.value(nums), self.bound)

    def __str__(self) -> str:
        return f"{self.lhs} {self.op.value} {self.bound}"


@dataclass(frozen=True)
class SimpleAction:
    name: str
    base: str
    pre_b: tuple[Literal, ...]
    pre_q: tuple[SimpleAtom, ...]
    add: frozenset[str]
    delete: frozenset[str]
    eff_q: tuple[tuple[str, Fraction], ...]
    cost: Fraction

    @property
    def effects(self) -> dict[str, Fraction]:
        return dict(self.eff_q)


@dataclass(frozen=True)
class SimpleProblem:
    fluents: tuple[str, ...]
    state_vars: tuple[str, ...]
    actions: tuple[SimpleAction, ...]
    init: State
    goal_b: tuple[Literal, ...]
    goal_q: tuple[SimpleAtom, ...]
    name: str = "problem"


class StatsRecord(NamedTuple):
    actions: int
    sigma: int
    optimistic: int
    psi: int

    def line(self) -> str:
        return f"|A|={self.actions} |A_Sigma|={self.sigma} |A_O|={self.optimistic} |Psi|={self.psi}"


def require_fragment(problem: ControlProblem) -> None:
    diag = check_controllable_simple(problem)
    if not diag.accepted:
        raise FragmentViolation(diag)


def compiled_effects(action: Action, problem: ControlProblem) -> tuple[NumericEffect, ...]:
    """Effects of ``action`` that are ``x += <control expression>``.

    Other effects can only touch variables no condition mentions (the
    fragment check guarantees it); they cannot influence any relaxed
    estimate and are left out of the compiled action.
    """
    us = {u.name for u in problem.control_vars}
    return tuple(e for e in action.eff_q if e.additive and ex.variables(e.expr) <= us)


def effect_domains(action: Action, problem: ControlProblem) -> list[Interval]:
    domains = problem.domains
    return [dom_of(e.expr, domains) for e in compiled_effects(action, problem)]


def relax_condition(cond: AtomCondition, domains) -> SimpleAtom:
    return SimpleAtom(cond.lhs, cond.op, dom_of(cond.rhs, domains).lo)


def _goal_atom(cond: AtomCondition) -> SimpleAtom:
    # goal atoms are control-free; dom_of of a constant tree is a point
    return relax_condition(cond, {})


def numeric_atoms(problem: ControlProblem) -> tuple[SimpleAtom, ...]:
    """Distinct relaxed numeric atoms of the goal and all preconditions (Psi)."""
    domains = problem.domains
    seen = {}
    for c in problem.goal_q:
        seen.setdefault(_goal_atom(c), None)
    for a in problem.actions:
        for c in a.pre_q:
            seen.setdefault(relax_condition(c, domains), None)
    return tuple(seen)


def collect_relevant_conditions(action: Action, problem: ControlProblem, atoms=None) -> tuple[SimpleAtom, ...]:
    targets = {e.var for e in compiled_effects(action, problem)}
    if atoms is None:
        atoms = numeric_atoms(problem)
    return tuple(psi for psi in atoms if psi.lhs.variables & targets)


def sign_choice(psi: SimpleAtom, eff: NumericEffect, domains) -> Entry:
    """Endpoint of the effect's interval that pushes ``psi`` hardest, or IRRELEVANT."""
    w = psi.lhs.coeff(eff.var)
    if w == 0:
        return IRRELEVANT
    dom = dom_of(eff.expr, domains)
    return dom.hi if w > 0 else dom.lo


def signature(psi: SimpleAtom, action: Action, problem: ControlProblem) -> Signature:
    domains = problem.domains
    return tuple(sign_choice(psi, e, domains) for e in compiled_effects(action, problem))


def _sort_key(sig: Signature):
    return tuple((0, Fraction(0)) if v is IRRELEVANT else (1, v) for v in sig)


def _compatible(a: Signature, b: Signature) -> bool:
    return all(x is IRRELEVANT or y is IRRELEVANT or x == y for x, y in zip(a, b))


def _merge(a: Signature, b: Signature) -> Signature:
    return tuple(y if x is IRRELEVANT else x for x, y in zip(a, b))


def collapse_signatures(sigs: Iterable[Signature], fill: Optional[Sequence[Fraction]] = None) -> list[Signature]:
    """Merge signatures that agree wherever both are relevant.

    Signatures are visited in canonical order and each is merged into the
    first compatible signature already kept; passes repeat until nothing
    merges. When ``fill`` is given, slots still IRRELEVANT afterwards take
    the corresponding ``fill`` value (the lower endpoint of that effect).
    """
    items = sorted(set(sigs), key=_sort_key)
    while True:
        kept: list[Signature] = []
        for sig in items:
            for i, other in enumerate(kept):
                if _compatible(other, sig):
                    kept[i] = _merge(other, sig)
                    break
            else:
                kept.append(sig)
        kept = sorted(set(kept), key=_sort_key)
        if len(kept) == len(items):
            break
        items = kept
    if fill is not None:
        kept = sorted(
            {tuple(f if v is IRRELEVANT else v for v, f in zip(sig, fill)) for sig in kept},
            key=_sort_key,
        )
    return kept


def action_signatures(action: Action, problem: ControlProblem, atoms=None) -> tuple[list[Signature], list[Signature]]:
    """Signature set of ``action`` before and after collapsing."""
    relevant = collect_relevant_conditions(action, problem, atoms)
    raw = sorted({signature(psi, action, problem) for psi in relevant}, key=_sort_key)
    fill = [d.lo for d in effect_domains(action, problem)]
    return raw, collapse_signatures(raw, fill)


def _lambda_name(base: str, lambdas: Sequence[Fraction]) -> str:
    return f"{base}[{','.join(str(v) for v in lambdas)}]"


def _variant(action: Action, problem: ControlProblem, relaxed, lambdas) -> SimpleAction:
    effects = compiled_effects(action, problem)
    return SimpleAction(
        name=_lambda_name(action.name, lambdas),
        base=action.name,
        pre_b=action.pre_b,
        pre_q=relaxed,
        add=action.add,
        delete=action.delete,
        eff_q=tuple((e.var, lam) for e, lam in zip(effects, lambdas)),
        cost=action.cost,
    )


def _relaxed_pre(action: Action, domains) -> tuple[SimpleAtom, ...]:
    return tuple(dict.fromkeys(relax_condition(c, domains) for c in action.pre_q))


def _compiled_goal(problem: ControlProblem) -> tuple[SimpleAtom, ...]:
    return tuple(_goal_atom(c) for c in problem.goal_q)


def optimistic_size(problem: ControlProblem) -> int:
    """``|A_O|`` computed combinatorially, without building the actions."""
    total = 0
    for a in problem.actions:
        total += 2 ** sum(not d.is_point for d in effect_domains(a, problem))
    return total


def optimistic_compile(problem: ControlProblem, max_actions: int = DEFAULT_MAX_ACTIONS) -> SimpleProblem:
    require_fragment(problem)
    size = optimistic_size(problem)
    if size > max_actions:
        raise CompilationTooLarge(f"optimistic compilation would have {size} actions (limit {max_actions})")
    domains = problem.domains
    actions = []
    for a in problem.actions:
        relaxed = _relaxed_pre(a, domains)
        choices = [(d.lo,) if d.is_point else (d.lo, d.hi) for d in effect_domains(a, problem)]
        for lambdas in itertools.product(*choices):
            actions.append(_variant(a, problem, relaxed, lambdas))
    return SimpleProblem(
        problem.fluents, problem.state_vars, tuple(actions), problem.init,
        problem.goal_b, _compiled_goal(problem), problem.name,
    )


def signature_compile(problem: ControlProblem) -> SimpleProblem:
    require_fragment(problem)
    domains = problem.domains
    atoms = numeric_atoms(problem)
    actions = []
    for a in problem.actions:
        relaxed = _relaxed_pre(a, domains)
        _, sigs = action_signatures(a, problem, atoms)
        if not sigs:
            if not (a.add or a.delete):
                continue
            sigs = [tuple(d.lo for d in effect_domains(a, problem))]
        for sig in sigs:
            actions.append(_variant(a, problem, relaxed, sig))
    return SimpleProblem(
        problem.fluents, problem.state_vars, tuple(actions), problem.init,
        problem.goal_b, _compiled_goal(problem), problem.name,
    )


def compile_stats(problem: ControlProblem) -> StatsRecord:
    return StatsRecord(
        actions=len(problem.actions),
        sigma=len(signature_compile(problem).actions),
        optimistic=optimistic_size(problem),
        psi=len(numeric_atoms(problem)),
    )


def simple_violations(sp: SimpleProblem) -> list[str]:
    """Ways in which ``sp`` falls outside the simple numeric fragment (empty if none)."""
    xs = set(sp.state_vars)
    out = []
    atoms = [("goal", g) for g in sp.goal_q] + [(a.name, p) for a in sp.actions for p in a.pre_q]
    for where, atom in atoms:
        if not isinstance(atom.bound, Fraction):
            out.append(f"{where}: non-constant bound in {atom}")
        if not atom.lhs.variables <= xs:
            out.append(f"{where}: unknown variables in {atom}")
        if atom.lhs.constant != 0:
            out.append(f"{where}: unnormalized {atom}")
    for a in sp.actions:
        for var, k in a.eff_q:
            if var not in xs or not isinstance(k, Fraction):
                out.append(f"{a.name}: effect {var} += {k!r} is not constant additive")
    return out
