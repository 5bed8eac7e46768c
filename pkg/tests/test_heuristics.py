import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from controlplan.compilation import signature_compile
from controlplan.generators import example1, gen_counters, gen_random, shared_increment
from controlplan.heuristics import (
    INFINITY,
    NoPositiveNetEffect,
    SubgoalingHeuristic,
    h_add,
    h_mgc,
    h_mrp,
    h_zero,
    is_dead_end,
    make_heuristic,
    repetitions_needed,
)
from controlplan.model import Literal, State, applicable, apply, is_goal

F = Fraction


def hadd_oracle(sp, state):
    """Relax-until-stable fixpoint over all atoms; no priority queue, no achiever index."""
    atoms = list(dict.fromkeys([*sp.goal_b, *sp.goal_q, *(x for a in sp.actions for x in (*a.pre_b, *a.pre_q))]))

    def sat(atom):
        if isinstance(atom, Literal):
            return (atom.fluent in state.props) == atom.positive
        return atom.holds(state.nums)

    cost = {x: (F(0) if sat(x) else INFINITY) for x in atoms}
    changed = True
    while changed:
        changed = False
        for a in sp.actions:
            pre = [cost[x] for x in (*a.pre_b, *a.pre_q)]
            if INFINITY in pre:
                continue
            base = sum(pre, F(0))
            for x in atoms:
                if cost[x] == 0:
                    continue
                if isinstance(x, Literal):
                    if x.fluent not in (a.add if x.positive else a.delete):
                        continue
                    reps = F(1)
                else:
                    net = sum((x.lhs.coeff(v) * k for v, k in a.eff_q), F(0))
                    if net <= 0:
                        continue
                    reps = (x.bound - x.lhs.value(state.nums)) / net
                c = base + a.cost * reps
                if c < cost[x]:
                    cost[x], changed = c, True
    goals = [cost[g] for g in dict.fromkeys((*sp.goal_b, *sp.goal_q))]
    return INFINITY if INFINITY in goals else sum(goals, F(0))


def test_example1_values():
    sp = signature_compile(example1())
    assert h_add(State((), {"x": 5, "y": 4}), sp) == F(15, 13)
    assert h_add(State((), {"x": 0, "y": 0}), sp) == INFINITY
    assert is_dead_end(example1().init, sp)
    assert hadd_oracle(sp, State((), {"x": 5, "y": 4})) == F(15, 13)


def test_shared_increment_values():
    sp = signature_compile(shared_increment(10))
    assert h_add(sp.init, sp) == 20
    assert h_mrp(sp.init, sp) == 10


def min_uniform_plan(problem):
    """Fewest applications of the single action reaching the goal, by direct simulation."""
    (action,) = problem.actions
    state, k = problem.init, 0
    while not is_goal(state, problem):
        state, k = apply(state, action), k + 1
    return k


def test_mrp_against_simulation():
    for bound in (1, 3, 10, 17):
        p = shared_increment(bound)
        sp = signature_compile(p)
        assert h_mrp(p.init, sp) == min_uniform_plan(p)
        assert h_add(p.init, sp) == 2 * min_uniform_plan(p)


def test_goal_state_is_zero():
    sp = signature_compile(shared_increment(2))
    s = State((), {"x": 2, "y": 5})
    assert h_add(s, sp) == 0 and h_mrp(s, sp) == 0 and h_mgc(s, sp) == 0


def test_strict_boundary_repetitions_zero():
    sp = signature_compile(example1())
    goal = sp.goal_q[0]
    action = sp.actions[0]
    assert repetitions_needed(State((), {"x": 20, "y": 4}), goal, action) == 0
    assert repetitions_needed(State((), {"x": 21, "y": 4}), goal, action) == 0
    with pytest.raises(NoPositiveNetEffect):
        repetitions_needed(State((), {"x": 0, "y": 0}), sp.actions[0].pre_q[1], action)


def test_baselines():
    p = gen_counters(3)
    assert h_zero(p.init) == 0
    assert h_mgc(p.init, p) == 2
    assert h_mgc(p.init, signature_compile(p)) == 2
    with pytest.raises(ValueError):
        make_heuristic("hmax", p)


def test_counters_value():
    # each goal x_{i+1} - x_i >= 1 is reached by 1/4 of an increase_x_{i+1}
    sp = signature_compile(gen_counters(5))
    assert h_add(sp.init, sp) == 1
    assert h_mrp(sp.init, sp) == 1


def _random_reachable(p, seed, steps):
    rng = random.Random(seed)
    state = p.init
    for _ in range(steps):
        options = []
        for a in p.actions:
            decls = [p.decl(u) for u in p.action_controls(a)]
            mu = {d.name: rng.choice(d.grid()) for d in decls}
            if applicable(state, a, mu):
                options.append((a, mu))
        if not options:
            break
        a, mu = rng.choice(options)
        state = apply(state, a, mu)
    return state


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 100_000), st.integers(0, 5))
def test_hadd_matches_oracle(seed, steps):
    p = gen_random(seed)
    sp = signature_compile(p)
    sub = SubgoalingHeuristic(sp)
    s = _random_reachable(p, seed, steps)
    assert sub.h_add(s) == hadd_oracle(sp, s)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 100_000), st.integers(0, 5))
def test_mrp_bounded_by_hadd(seed, steps):
    p = gen_random(seed)
    sub = SubgoalingHeuristic(signature_compile(p))
    s = _random_reachable(p, seed, steps)
    a, m = sub.h_add(s), sub.h_mrp(s)
    assert (a == INFINITY) == (m == INFINITY)
    if a != INFINITY:
        assert 0 <= m <= a
        if is_goal(s, p):
            assert a == 0
