import math
import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from controlplan.expr import Var
from controlplan.generators import example1, gen_counters, gen_random
from controlplan.heuristics import make_heuristic
from controlplan.interval import Interval
from controlplan.model import Action, ControlProblem, ControlVarDecl, NumericEffect, State, condition, validate_plan
from controlplan.search import (
    CONTINUOUS_RESOLUTION,
    ConfigInvalid,
    GridInfeasible,
    Sampler,
    SearchConfig,
    brute_force_discrete,
    dpex,
    rectify,
    sample_control,
)


def capped_counter():
    """x grows by u in {0, 1} while x <= 2; the goal x >= 5 is unreachable but h_add is finite."""
    u = ControlVarDecl("u", Interval(0, 1), 1)
    inc = Action("inc", pre_q=(condition({"x": 1}, "<=", 2),), eff_q=(NumericEffect("x", Var("u")),))
    return ControlProblem((), ("x",), (u,), (inc,), State((), {"x": 0}), goal_q=(condition({"x": 1}, ">=", 5),))


def test_rectify():
    assert rectify(3.5, 0) == 3.5
    assert rectify(0, 1) == pytest.approx(math.log(2), abs=1e-12)


@settings(max_examples=500, deadline=None)
@given(st.floats(0, 1e6, allow_nan=False), st.integers(0, 10**6 - 1))
def test_rectify_strictly_increasing(h, n):
    assert rectify(h, n + 1) > rectify(h, n)


def test_discrete_draws_are_uniform():
    p = gen_counters(2, 0, 4)
    sampler = Sampler(p, random.Random(7))
    decl = p.decl("u")
    counts = Counter(sampler.draw(decl) for _ in range(100_000))
    assert set(counts) == {0, 1, 2, 3, 4}
    for v in counts.values():
        assert abs(v / 100_000 - 0.2) <= 0.03


def test_continuous_draws_on_dyadic_grid():
    p = gen_counters(2, 0, 4, kind="continuous")
    sampler = Sampler(p, random.Random(3))
    decl = p.decl("u")
    for _ in range(1000):
        v = sampler.draw(decl)
        assert v in decl.domain
        assert ((v - decl.domain.lo) / decl.domain.width * CONTINUOUS_RESOLUTION).denominator == 1


def test_sample_control_respects_preconditions():
    p = example1()
    s = State((), {"x": 2, "y": 4})
    rng = random.Random(0)
    for _ in range(50):
        mu = sample_control(p.actions[0], s, p, rng)
        assert mu is not None and mu["u1"] < 2 and mu["u2"] < 4
    assert sample_control(p.actions[0], p.init, p, rng) is None


def test_dead_end_at_init():
    p = example1()
    r = dpex(p, make_heuristic("hadd", p))
    assert r.status == "Exhausted" and r.h_init == math.inf
    assert r.stats.partial_expansions == 0 and r.stats.dead_ends_pruned == 1


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("h", ["hadd", "hmrp", "hmgc"])
def test_counters_solved_and_deterministic(n, h):
    p = gen_counters(n)
    first = dpex(p, make_heuristic(h, p), SearchConfig(seed=1, timeout=30))
    again = dpex(p, make_heuristic(h, p), SearchConfig(seed=1, timeout=30))
    assert first.solved and validate_plan(p, first.plan).solution
    assert first.plan == again.plan
    assert first.stats.counters() == again.stats.counters()


def test_continuous_counters():
    p = gen_counters(4, kind="continuous")
    r = dpex(p, make_heuristic("hadd", p), SearchConfig(seed=2, timeout=30))
    assert r.solved and validate_plan(p, r.plan).solution


def test_trace_reinserts_with_rectified_priority():
    p = gen_counters(4)
    trace = []
    dpex(p, make_heuristic("hadd", p), SearchConfig(seed=1), trace=trace)
    reinserts = [e for e in trace if e[0] == "reinsert"]
    assert reinserts and all(n >= 1 for _, n, _ in reinserts)
    extracts = [f for kind, _, f in trace if kind == "extract"]
    assert extracts[0] == float(make_heuristic("hadd", p)(p.init))


def test_full_expansion_exhausts_finite_space():
    p = capped_counter()
    r = dpex(p, make_heuristic("hadd", p), SearchConfig(seed=1, timeout=30))
    assert r.status == "Exhausted"
    assert brute_force_discrete(p).status == "Exhausted"


def test_limits():
    p = gen_counters(9)
    assert dpex(p, make_heuristic("h0", p), SearchConfig(max_nodes=50)).status == "NodeCapReached"
    assert dpex(p, make_heuristic("h0", p), SearchConfig(timeout=0.05)).status == "Timeout"


def test_config_checks():
    for bad in (SearchConfig(samples=0), SearchConfig(timeout=0), SearchConfig(max_nodes=0), SearchConfig(seed=-1)):
        with pytest.raises(ConfigInvalid):
            bad.check()
    with pytest.raises(GridInfeasible):
        brute_force_discrete(gen_counters(2, kind="continuous"))


def test_brute_force_finds_shortest():
    p = gen_counters(3)
    r = brute_force_discrete(p)
    # n - 1 increases suffice: x_i gets i - 1
    assert r.solved and len(r.plan) == 2 and validate_plan(p, r.plan).solution


def test_agrees_with_brute_force():
    mismatches = []
    for seed in range(50):
        p = gen_random(seed)
        bf = brute_force_discrete(p, SearchConfig(max_nodes=3000, timeout=10))
        d = dpex(p, make_heuristic("hadd", p), SearchConfig(seed=1, max_nodes=3000, timeout=5))
        if d.solved:
            assert validate_plan(p, d.plan).solution
        if bf.status in ("Solved", "Exhausted") and (bf.status == "Solved") != d.solved:
            mismatches.append((seed, bf.status, d.status))
        if d.status == "Exhausted" and bf.solved:
            mismatches.append((seed, bf.status, d.status))
    assert mismatches == []


def test_goal_at_init():
    p = gen_counters(2)
    p = type(p)(p.fluents, p.state_vars, p.control_vars, p.actions, State((), {"x1": 0, "x2": 1}), goal_q=p.goal_q)
    r = dpex(p, make_heuristic("hadd", p))
    assert r.solved and r.plan == [] and r.stats.expansions == 0
    assert brute_force_discrete(p).plan == []


def test_discretized_example1_unsolvable():
    assert brute_force_discrete(example1(step=1)).status == "Exhausted"


def test_oracle_paths_never_pruned():
    from controlplan.compilation import signature_compile
    from controlplan.heuristics import SubgoalingHeuristic
    from controlplan.model import apply

    for seed in range(100):
        p = gen_random(seed)
        bf = brute_force_discrete(p, SearchConfig(max_nodes=3000, timeout=10))
        if not bf.solved:
            continue
        sub = SubgoalingHeuristic(signature_compile(p))
        state = p.init
        assert not sub.is_dead_end(state), seed
        for step in bf.plan:
            state = apply(state, p.action(step.action), step.mu)
            assert not sub.is_dead_end(state), seed
