"""Problem instances: small fixtures, the counters domain and random instances."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .expr import Add, Const, Mul, Sub, Var
from .interval import Interval
from .model import Action, ControlProblem, ControlVarDecl, LinExpr, NumericEffect, State, condition
from .search import ConfigInvalid


def example1(step=None) -> ControlProblem:
    """One action driving x up to 20 with two control variables.

    ``x > u1, y > u2``; ``x += 2*u1 + u2, y += u1 - 3*u2``; ``u1 in [0, 4]``,
    ``u2 in [3, 5]``; init ``x = y = 0``; goal ``x > 20``. Pass ``step`` to get
    discrete control variables.
    """
    u1, u2 = Var("u1"), Var("u2")
    a = Action(
        "a",
        pre_q=(condition({"x": 1}, ">", u1), condition({"y": 1}, ">", u2)),
        eff_q=(
            NumericEffect("x", Add(Mul(Const(2), u1), u2)),
            NumericEffect("y", Sub(u1, Mul(Const(3), u2))),
        ),
    )
    return ControlProblem(
        fluents=(),
        state_vars=("x", "y"),
        control_vars=(ControlVarDecl("u1", Interval(0, 4), step), ControlVarDecl("u2", Interval(3, 5), step)),
        actions=(a,),
        init=State((), {"x": 0, "y": 0}),
        goal_q=(condition({"x": 1}, ">", 20),),
        name="example1",
    )


def shared_increment(bound=10) -> ControlProblem:
    """Goals ``x >= bound`` and ``y >= bound`` served by one action adding 1 to both."""
    a = Action("inc", eff_q=(NumericEffect("x", Const(1)), NumericEffect("y", Const(1))))
    return ControlProblem(
        (), ("x", "y"), (), (a,), State((), {"x": 0, "y": 0}),
        goal_q=(condition({"x": 1}, ">=", bound), condition({"y": 1}, ">=", bound)),
        name=f"shared-increment-{bound}",
    )


def gen_counters(n: int, lo=0, hi=4, kind: str = "discrete", step=1) -> ControlProblem:
    """``n`` counters from 0; goal ``x_{i+1} - x_i >= 1``; ``increase_i`` adds ``u in [lo, hi]`` to ``x_i``."""
    lo, hi = Fraction(lo), Fraction(hi)
    if n < 2:
        raise ConfigInvalid("counters needs n >= 2")
    if lo > hi or hi < 0:
        raise ConfigInvalid(f"bad control range [{lo}, {hi}]")
    if kind not in ("discrete", "continuous"):
        raise ConfigInvalid(f"unknown kind {kind!r}")
    xs = tuple(f"x{i}" for i in range(1, n + 1))
    u = ControlVarDecl("u", Interval(lo, hi), Fraction(step) if kind == "discrete" else None)
    actions = tuple(Action(f"increase_{x}", eff_q=(NumericEffect(x, Var("u")),)) for x in xs)
    goal = tuple(condition({xs[i + 1]: 1, xs[i]: -1}, ">=", 1) for i in range(n - 1))
    return ControlProblem(
        (), xs, (u,), actions, State((), {x: 0 for x in xs}), goal_q=goal,
        name=f"counters-{kind[0]}-{n}",
    )


def counters_suite(count: int = 10, kind: str = "discrete", hi=4) -> list[ControlProblem]:
    """Counters instances of growing size, ``n = 2 .. count + 1``."""
    return [gen_counters(n, 0, hi, kind) for n in range(2, count + 2)]


@dataclass
class RandomSpec:
    max_vars: int = 4
    max_actions: int = 4
    max_controls: int = 2
    max_width: int = 3
    max_fluents: int = 2
    kind: str = "discrete"

    def check(self):
        if not (1 <= self.max_vars <= 6 and 1 <= self.max_actions <= 6 and 0 <= self.max_controls <= 3):
            raise ConfigInvalid("random instances are limited to 6 variables, 6 actions and 3 controls per action")


def _random_control_expr(rng: random.Random, controls: list[str]):
    terms = []
    for u in controls:
        if rng.random() < 0.7:
            c = rng.choice((-2, -1, 1, 2))
            terms.append(Var(u) if c == 1 else Mul(Const(c), Var(u)))
    if len(controls) >= 2 and rng.random() < 0.1:
        terms.append(Mul(Var(controls[0]), Var(controls[1])))
    if not terms or rng.random() < 0.4:
        terms.append(Const(rng.choice((-1, 1, 2))))
    node = terms[0]
    for t in terms[1:]:
        node = Add(node, t)
    return node


def _random_lin(rng: random.Random, xs: tuple[str, ...]) -> LinExpr:
    picked = rng.sample(xs, rng.randint(1, min(2, len(xs))))
    return LinExpr.of({x: rng.choice((-1, 1, 1, 2)) for x in picked})


def gen_random(seed: int, spec: RandomSpec = None) -> ControlProblem:
    """A random controllable simple problem; the same seed gives the same problem."""
    spec = spec or RandomSpec()
    spec.check()
    rng = random.Random(seed)
    xs = tuple(f"x{i}" for i in range(rng.randint(1, spec.max_vars)))
    fluents = tuple(f"p{i}" for i in range(rng.randint(0, spec.max_fluents)))
    init = State(
        [f for f in fluents if rng.random() < 0.5],
        {x: rng.randint(-2, 2) for x in xs},
    )
    decls, actions = [], []
    for i in range(rng.randint(1, spec.max_actions)):
        controls = []
        for j in range(rng.randint(0, spec.max_controls)):
            lo = rng.randint(-2, 1)
            width = rng.randint(0, spec.max_width)
            decl = ControlVarDecl(f"u{i}_{j}", Interval(lo, lo + width), 1 if spec.kind == "discrete" else None)
            decls.append(decl)
            controls.append(decl.name)
        targets = rng.sample(xs, rng.randint(1, min(3, len(xs))))
        effects = tuple(NumericEffect(x, _random_control_expr(rng, controls)) for x in targets)
        pre = []
        for _ in range(rng.randint(0, 2)):
            if controls and rng.random() < 0.5:
                rhs = Add(Var(rng.choice(controls)), Const(rng.randint(-3, 1)))
            else:
                rhs = Const(rng.randint(-3, 1))
            pre.append(condition(_random_lin(rng, xs), rng.choice((">", ">=")), rhs))
        pre_b, add, delete = [], set(), set()
        if fluents:
            if rng.random() < 0.3:
                pre_b.append(rng.choice(fluents))
            if rng.random() < 0.4:
                add.add(rng.choice(fluents))
            if rng.random() < 0.2:
                f = rng.choice(fluents)
                if f not in add:
                    delete.add(f)
        actions.append(Action(f"a{i}", pre_b=pre_b, pre_q=pre, add=add, delete=delete, eff_q=effects))
    goal_q = []
    for _ in range(rng.randint(1, 2)):
        lin = _random_lin(rng, xs)
        goal_q.append(condition(lin, rng.choice((">", ">=")), lin.value(init.nums) + rng.randint(1, 4)))
    goal_b = [rng.choice(fluents)] if fluents and rng.random() < 0.3 else []
    return ControlProblem(fluents, xs, tuple(decls), tuple(actions), init, goal_b, goal_q, name=f"random-{seed}")
