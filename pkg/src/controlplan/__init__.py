"""Numeric planning with control variables: compilations, subgoaling heuristics and sampled search."""

from .compilation import (
    IRRELEVANT,
    CompilationTooLarge,
    FragmentViolation,
    SimpleProblem,
    compile_stats,
    optimistic_compile,
    signature_compile,
)
from .expr import Add, Const, Mul, Sub, Var
from .heuristics import INFINITY, h_add, h_mgc, h_mrp, h_zero, is_dead_end, make_heuristic
from .interval import Interval, dom_of
from .io import ParseError, dump_plan, dump_problem, load_plan, load_problem, parse_problem
from .model import (
    Action,
    ControlProblem,
    ControlVarDecl,
    NumericEffect,
    PlanStep,
    State,
    apply,
    check_controllable_simple,
    condition,
    validate_plan,
)
from .search import SearchConfig, brute_force_discrete, dpex, rectify

__all__ = [
    "IRRELEVANT", "CompilationTooLarge", "FragmentViolation", "SimpleProblem", "compile_stats",
    "optimistic_compile", "signature_compile", "Add", "Const", "Mul", "Sub", "Var", "INFINITY",
    "h_add", "h_mgc", "h_mrp", "h_zero", "is_dead_end", "make_heuristic", "Interval", "dom_of",
    "ParseError", "dump_plan", "dump_problem", "load_plan", "load_problem", "parse_problem",
    "Action", "ControlProblem", "ControlVarDecl", "NumericEffect", "PlanStep", "State", "apply",
    "check_controllable_simple", "condition", "validate_plan", "SearchConfig", "brute_force_discrete",
    "dpex", "rectify",
]
