"""Best-first search with delayed partial expansions.

Each time a node is taken from the open list, ``K`` successors are drawn by
rejection sampling over the control-variable box and inserted; the node
itself goes back into the open list with its partial expansion count bumped,
so its priority ``h + ln(1 + n)`` decays. A node is dropped for good only
when it is fully expanded, which is possible only when every control
variable it could use is discrete.

:func:`brute_force_discrete` is an exhaustive breadth-first oracle for
problems whose control variables all live on finite grids.
"""

from __future__ import annotations

import heapq
import itertools
import math
import random
import time
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .heuristics import INFINITY
from .model import (
    Action,
    ControlProblem,
    ModelError,
    PlanStep,
    State,
    applicable,
    apply,
    holds,
    is_goal,
    validate_plan,
)

# continuous draws are uniform over this many equal steps of the interval
CONTINUOUS_RESOLUTION = 2**32


class ConfigInvalid(ValueError):
    pass


class GridInfeasible(ModelError):
    pass


@dataclass
class SearchConfig:
    samples: int = 5
    seed: int = 1
    max_rejections: int = 100
    timeout: Optional[float] = None
    max_nodes: Optional[int] = None
    duplicate_pruning: bool = True
    # grids up to this many (action, valuation) pairs per state are enumerated
    # so that nodes can become fully expanded
    max_grid: int = 4096

    def check(self):
        if self.samples < 1:
            raise ConfigInvalid("samples must be >= 1")
        if self.max_rejections < 1:
            raise ConfigInvalid("max_rejections must be >= 1")
        if self.timeout is not None and self.timeout <= 0:
            raise ConfigInvalid("timeout must be positive")
        if self.max_nodes is not None and self.max_nodes < 1:
            raise ConfigInvalid("max_nodes must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigInvalid("seed must fit in 64 bits")


@dataclass
class SearchStats:
    expansions: int = 0
    partial_expansions: int = 0
    samples_drawn: int = 0
    samples_rejected: int = 0
    nodes_generated: int = 0
    duplicates_pruned: int = 0
    dead_ends_pruned: int = 0
    wall_time: float = 0.0
    plan_length: int = 0

    def counters(self) -> dict:
        """Everything except wall time, for determinism checks."""
        d = dict(self.__dict__)
        d.pop("wall_time")
        return d


@dataclass
class SearchResult:
    status: str  # Solved | Exhausted | Timeout | NodeCapReached
    plan: Optional[list[PlanStep]]
    stats: SearchStats
    h_init: object = None

    @property
    def solved(self) -> bool:
        return self.status == "Solved"


def rectify(h: float, n: int) -> float:
    return h + math.log1p(n)


class Sampler:
    """Rejection sampler for control valuations, with draw counters."""

    def __init__(self, problem: ControlProblem, rng: random.Random, max_rejections: int = 100):
        self.problem = problem
        self.rng = rng
        self.max_rejections = max_rejections
        self.controls = {a.name: [problem.decl(u) for u in problem.action_controls(a)] for a in problem.actions}
        self.drawn = 0
        self.rejected = 0

    def draw(self, decl) -> Fraction:
        lo, width = decl.domain.lo, decl.domain.width
        if decl.step is None:
            return lo + width * Fraction(self.rng.randrange(CONTINUOUS_RESOLUTION + 1), CONTINUOUS_RESOLUTION)
        return lo + decl.step * self.rng.randrange(decl.grid_size)

    def sample_control(self, action: Action, state: State) -> Optional[dict]:
        if not all(holds(state, l) for l in action.pre_b):
            return None
        decls = self.controls[action.name]
        if not decls:
            return {} if applicable(state, action) else None
        for _ in range(self.max_rejections):
            mu = {d.name: self.draw(d) for d in decls}
            self.drawn += 1
            if applicable(state, action, mu):
                return mu
            self.rejected += 1
        return None

    def sample_successor(self, state: State) -> Optional[tuple[Action, dict, State]]:
        """Pick actions uniformly without replacement until one yields a valuation."""
        pool = list(self.problem.actions)
        while pool:
            action = pool.pop(self.rng.randrange(len(pool)))
            mu = self.sample_control(action, state)
            if mu is not None:
                return action, mu, apply(state, action, mu, check=False)
        return None


def sample_control(action: Action, state: State, problem: ControlProblem, rng: random.Random, max_rejections: int = 100) -> Optional[dict]:
    return Sampler(problem, rng, max_rejections).sample_control(action, state)


def phi_sample_successor(state: State, problem: ControlProblem, rng: random.Random, max_rejections: int = 100):
    return Sampler(problem, rng, max_rejections).sample_successor(state)


def _grid_valuations(problem: ControlProblem, action: Action):
    decls = [problem.decl(u) for u in problem.action_controls(action)]
    for values in itertools.product(*(d.grid() for d in decls)):
        yield {d.name: v for d, v in zip(decls, values)}


def _grid_size(problem: ControlProblem) -> Optional[int]:
    """Number of grounded (action, valuation) pairs, or None if any control is continuous."""
    total = 0
    for a in problem.actions:
        size = 1
        for u in problem.action_controls(a):
            decl = problem.decl(u)
            if decl.step is None:
                return None
            size *= decl.grid_size
        total += size
    return total


def _mu_key(mu: dict) -> tuple:
    return tuple(sorted(mu.items()))


class _Node:
    __slots__ = ("state", "parent", "action", "mu", "n", "h", "generated", "total")

    def __init__(self, state, parent, action, mu, h):
        self.state = state
        self.parent = parent
        self.action = action
        self.mu = mu
        self.n = 0
        self.h = h
        self.generated = None
        self.total = None

    def plan(self) -> list[PlanStep]:
        steps = []
        node = self
        while node.parent is not None:
            steps.append(PlanStep(node.action, node.mu))
            node = node.parent
        return steps[::-1]


def dpex(problem: ControlProblem, heuristic: Callable[[State], object], config: SearchConfig = None, trace: Optional[list] = None) -> SearchResult:
    """Run the search; ``trace`` (if given) receives ``(event, n, f)`` tuples."""
    config = config or SearchConfig()
    config.check()
    start = time.perf_counter()
    deadline = None if config.timeout is None else start + config.timeout
    rng = random.Random(config.seed)
    sampler = Sampler(problem, rng, config.max_rejections)
    stats = SearchStats()
    enumerable = _grid_size(problem)
    if enumerable is not None and enumerable > config.max_grid:
        enumerable = None

    def finish(status, plan=None):
        stats.samples_drawn, stats.samples_rejected = sampler.drawn, sampler.rejected
        stats.wall_time = time.perf_counter() - start
        if plan is not None:
            stats.plan_length = len(plan)
            report = validate_plan(problem, plan)
            if not report.solution:
                raise AssertionError(f"search returned an invalid plan: {report.reason} {report.detail}")
        return SearchResult(status, plan, stats, h_init)

    h_init = heuristic(problem.init)
    stats.nodes_generated = 1
    if h_init == INFINITY:
        stats.dead_ends_pruned = 1
        return finish("Exhausted")
    counter = itertools.count()
    open_list = []
    root = _Node(problem.init, None, None, None, h_init)
    heapq.heappush(open_list, (float(h_init), float(h_init), next(counter), root))
    seen = {problem.init}

    while open_list:
        if deadline is not None and time.perf_counter() > deadline:
            return finish("Timeout")
        f, _, _, node = heapq.heappop(open_list)
        if trace is not None:
            trace.append(("extract", node.n, f))
        if is_goal(node.state, problem):
            return finish("Solved", node.plan())
        if node.n == 0:
            stats.expansions += 1
        stats.partial_expansions += 1
        if enumerable is not None and node.total is None:
            node.generated = set()
            node.total = sum(
                1 for a in problem.actions for mu in _grid_valuations(problem, a) if applicable(node.state, a, mu)
            )
        for _ in range(config.samples):
            succ = sampler.sample_successor(node.state)
            if succ is None:
                continue
            action, mu, child = succ
            if node.generated is not None:
                node.generated.add((action.name, _mu_key(mu)))
            if config.duplicate_pruning and child in seen:
                stats.duplicates_pruned += 1
                continue
            seen.add(child)
            stats.nodes_generated += 1
            h = heuristic(child)
            if h == INFINITY:
                stats.dead_ends_pruned += 1
            else:
                hf = float(h)
                heapq.heappush(open_list, (hf, hf, next(counter), _Node(child, node, action.name, mu, h)))
            if config.max_nodes is not None and stats.nodes_generated >= config.max_nodes:
                return finish("NodeCapReached")
        if node.total is not None and len(node.generated) >= node.total:
            if trace is not None:
                trace.append(("closed", node.n, f))
            continue
        node.n += 1
        f_new = rectify(float(node.h), node.n)
        if trace is not None:
            trace.append(("reinsert", node.n, f_new))
        heapq.heappush(open_list, (f_new, float(node.h), next(counter), node))
    return finish("Exhausted")


def brute_force_discrete(problem: ControlProblem, config: SearchConfig = None) -> SearchResult:
    """Breadth-first search over every grounded successor, with duplicate detection."""
    config = config or SearchConfig()
    start = time.perf_counter()
    deadline = None if config.timeout is None else start + config.timeout
    if _grid_size(problem) is None:
        raise GridInfeasible("brute force needs every control variable to be discrete")
    grounded = [(a, mu) for a in problem.actions for mu in _grid_valuations(problem, a)]
    stats = SearchStats(nodes_generated=1)

    def finish(status, plan=None):
        stats.wall_time = time.perf_counter() - start
        if plan is not None:
            stats.plan_length = len(plan)
        return SearchResult(status, plan, stats)

    root = _Node(problem.init, None, None, None, None)
    if is_goal(problem.init, problem):
        return finish("Solved", [])
    queue = deque([root])
    seen = {problem.init}
    while queue:
        if deadline is not None and time.perf_counter() > deadline:
            return finish("Timeout")
        node = queue.popleft()
        stats.expansions += 1
        for action, mu in grounded:
            if not applicable(node.state, action, mu):
                continue
            child = apply(node.state, action, mu, check=False)
            if child in seen:
                stats.duplicates_pruned += 1
                continue
            seen.add(child)
            stats.nodes_generated += 1
            succ = _Node(child, node, action.name, mu, None)
            if is_goal(child, problem):
                return finish("Solved", succ.plan())
            if config.max_nodes is not None and stats.nodes_generated >= config.max_nodes:
                return finish("NodeCapReached")
            queue.append(succ)
    return finish("Exhausted")
