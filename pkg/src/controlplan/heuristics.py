"""Subgoaling heuristics over simple numeric problems.

``h_add`` is the additive subgoaling estimate with a continuous number of
repetitions: a numeric atom ``sum(w_x x) >= c`` unsatisfied in ``s`` costs
``min_a m(a) * cost(a) + cost(pre(a))`` over actions with positive net
effect ``N``, where ``m(a) = (c - sum(w_x s(x))) / N``. Strict atoms use the
same closure value. Propositional atoms cost ``min_a cost(a) + cost(pre(a))``
over their adders, and a conjunction costs the sum of its atoms.

``h_mrp`` follows the best achievers chosen by ``h_add`` from the goal and
charges every action once, at the largest repetition count any atom asked
of it.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

from .compilation import SimpleAction, SimpleAtom, SimpleProblem, signature_compile
from .model import AtomCondition, ControlProblem, Literal, State

INFINITY = math.inf

Value = Union[Fraction, float]


class NoPositiveNetEffect(ValueError):
    pass


def net_effect(psi: SimpleAtom, action: SimpleAction) -> Fraction:
    """Change of ``psi``'s left-hand side caused by one application of ``action``."""
    return sum((psi.lhs.coeff(var) * k for var, k in action.eff_q), Fraction(0))


def repetitions_needed(state: State, psi: SimpleAtom, action: SimpleAction) -> Fraction:
    if psi.holds(state.nums):
        return Fraction(0)
    n = net_effect(psi, action)
    if n <= 0:
        raise NoPositiveNetEffect(f"{action.name} does not increase {psi}")
    return (psi.bound - psi.lhs.value(state.nums)) / n


@dataclass
class Evaluation:
    """Per-atom costs of one fixpoint run; ``best`` and ``reps`` index actions."""

    atoms: list
    cost: list
    best: list
    reps: list
    goals: list

    @property
    def h_add(self) -> Value:
        total = Fraction(0)
        for g in self.goals:
            if self.cost[g] == INFINITY:
                return INFINITY
            total += self.cost[g]
        return total


class SubgoalingHeuristic:
    """Achiever index for a simple problem, built once and reused per state.

    Only possible achievers are indexed: adders (or deleters) for literals
    and actions with positive net effect for numeric atoms.
    """

    def __init__(self, problem: SimpleProblem):
        self.problem = problem
        self.actions = list(problem.actions)
        index: dict = {}

        def atom_id(atom) -> int:
            if atom not in index:
                index[atom] = len(index)
            return index[atom]

        self.goals = list(dict.fromkeys(atom_id(a) for a in (*problem.goal_b, *problem.goal_q)))
        self.pre = [
            list(dict.fromkeys(atom_id(a) for a in (*act.pre_b, *act.pre_q))) for act in self.actions
        ]
        self.atoms = list(index)
        self.cost = [act.cost for act in self.actions]
        self.needed_by = [[] for _ in self.atoms]
        for a, pre in enumerate(self.pre):
            for i in pre:
                self.needed_by[i].append(a)
        # achieves[a] lists (atom, net effect) pairs; net effect None for literals
        self.achievers = [[] for _ in self.atoms]
        self.achieves = [[] for _ in self.actions]
        for i, atom in enumerate(self.atoms):
            for a, act in enumerate(self.actions):
                if isinstance(atom, Literal):
                    pool = act.add if atom.positive else act.delete
                    if atom.fluent in pool:
                        self.achievers[i].append((a, None))
                        self.achieves[a].append((i, None))
                else:
                    n = net_effect(atom, act)
                    if n > 0:
                        self.achievers[i].append((a, n))
                        self.achieves[a].append((i, n))
        self._tie = [(act.cost, act.name) for act in self.actions]

    def evaluate(self, state: State) -> Evaluation:
        nums, props = state.nums, state.props
        n = len(self.atoms)
        cost: list = [INFINITY] * n
        best: list = [None] * n
        reps: list = [None] * n
        gap: list = [None] * n
        done = [False] * n
        heap = []
        for i, atom in enumerate(self.atoms):
            if isinstance(atom, Literal):
                sat = (atom.fluent in props) == atom.positive
            else:
                value = atom.lhs.value(nums)
                sat = atom.op.test(value, atom.bound)
                gap[i] = atom.bound - value
            if sat:
                cost[i] = Fraction(0)
                heapq.heappush(heap, (cost[i], i))

        remaining = [len(p) for p in self.pre]
        precost = [Fraction(0)] * len(self.actions)

        def enable(a: int):
            base = precost[a]
            for i, net in self.achieves[a]:
                if done[i] or best[i] is None and cost[i] == 0:
                    continue
                r = Fraction(1) if net is None else gap[i] / net
                c = base + self.cost[a] * r
                if c < cost[i] or (c == cost[i] and self._tie[a] < self._tie[best[i]]):
                    cost[i], best[i], reps[i] = c, a, r
                    heapq.heappush(heap, (c, i))

        for a, left in enumerate(remaining):
            if left == 0:
                enable(a)
        while heap:
            c, i = heapq.heappop(heap)
            if done[i] or c != cost[i]:
                continue
            done[i] = True
            for a in self.needed_by[i]:
                remaining[a] -= 1
                precost[a] += c
                if remaining[a] == 0:
                    enable(a)
        return Evaluation(self.atoms, cost, best, reps, self.goals)

    def h_add(self, state: State) -> Value:
        return self.evaluate(state).h_add

    def h_mrp(self, state: State) -> Value:
        ev = self.evaluate(state)
        if ev.h_add == INFINITY:
            return INFINITY
        required: dict[int, Fraction] = {}
        stack, seen = list(self.goals), set()
        while stack:
            i = stack.pop()
            if i in seen:
                continue
            seen.add(i)
            a = ev.best[i]
            if a is None:
                continue
            required[a] = max(required.get(a, Fraction(0)), ev.reps[i])
            stack.extend(self.pre[a])
        return sum((self.cost[a] * r for a, r in required.items()), Fraction(0))

    def is_dead_end(self, state: State) -> bool:
        return self.h_add(state) == INFINITY


def h_add(state: State, problem: SimpleProblem) -> Value:
    return SubgoalingHeuristic(problem).h_add(state)


def h_mrp(state: State, problem: SimpleProblem) -> Value:
    return SubgoalingHeuristic(problem).h_mrp(state)


def h_zero(state: State) -> Fraction:
    return Fraction(0)


def _goal_bound(atom) -> Fraction:
    if isinstance(atom, SimpleAtom):
        return atom.bound
    if isinstance(atom, AtomCondition):
        return atom.rhs.value  # goal right-hand sides are constants
    raise TypeError(atom)


def h_mgc(state: State, problem) -> Fraction:
    """Linear slack of the unmet numeric goals plus the number of unmet literals."""
    total = Fraction(0)
    for atom in problem.goal_q:
        bound = _goal_bound(atom)
        value = atom.lhs.value(state.nums)
        if not atom.op.test(value, bound):
            total += max(bound - value, Fraction(0))
    for lit in problem.goal_b:
        if (lit.fluent in state.props) != lit.positive:
            total += 1
    return total


def is_dead_end(state: State, problem_sigma: Union[SimpleProblem, SubgoalingHeuristic]) -> bool:
    if not isinstance(problem_sigma, SubgoalingHeuristic):
        problem_sigma = SubgoalingHeuristic(problem_sigma)
    return problem_sigma.is_dead_end(state)


HEURISTICS = ("h0", "hmgc", "hadd", "hmrp")


def make_heuristic(name: str, problem: ControlProblem) -> Callable[[State], Value]:
    """State evaluator by CLI name; hadd/hmrp run on the signature compilation."""
    if name == "h0":
        return h_zero
    if name == "hmgc":
        return lambda s: h_mgc(s, problem)
    if name in ("hadd", "hmrp"):
        sub = SubgoalingHeuristic(signature_compile(problem))
        return sub.h_add if name == "hadd" else sub.h_mrp
    raise ValueError(f"unknown heuristic {name!r}; choose from {', '.join(HEURISTICS)}")
