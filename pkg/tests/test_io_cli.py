import csv
import json
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from controlplan.bench import COLUMNS, coverage, run_benchmark, to_csv
from controlplan.cli import cli_main
from controlplan.generators import counters_suite, example1, gen_counters, gen_random, shared_increment
from controlplan.io import (
    ParseError,
    dump_plan,
    dump_problem,
    load_plan,
    load_problem,
    parse_problem,
    problem_to_dict,
    simple_to_control,
)
from controlplan.compilation import signature_compile
from controlplan.model import PlanStep
from controlplan.search import SearchConfig

FIXTURE = Path(__file__).parent / "fixtures" / "example1.json"


def test_fixture_matches_generator():
    assert load_problem(FIXTURE) == example1()


@pytest.mark.parametrize("problem", [example1(), example1(step=1), shared_increment(3), gen_counters(4)], ids=str)
def test_round_trip_fixtures(problem):
    assert parse_problem(dump_problem(problem)) == problem


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from(["discrete", "continuous"]))
def test_round_trip_random(seed, kind):
    from controlplan.generators import RandomSpec

    p = gen_random(seed, RandomSpec(kind=kind))
    text = dump_problem(p)
    assert parse_problem(text) == p
    assert dump_problem(parse_problem(text)) == text


def test_rationals_as_strings():
    p = gen_counters(2, lo=0, hi=Fraction(3, 2), step=Fraction(1, 2))
    doc = problem_to_dict(p)
    assert doc["control_vars"][0]["hi"] == "3/2"
    assert parse_problem(doc) == p


def test_compiled_problem_serializes():
    sp = signature_compile(example1())
    back = parse_problem(dump_problem(sp))
    assert back == simple_to_control(sp)
    assert [a.name for a in back.actions] == ["a[13,-5]"]


@pytest.mark.parametrize(
    "mutate, where",
    [
        (lambda d: d["control_vars"][0].update(lo=0.5), "control_vars[0].lo"),
        (lambda d: d["actions"][0]["pre_q"][0].update(rhs="w"), "actions[0].pre_q[0].rhs"),
        (lambda d: d["actions"][0]["pre_q"][0].update(lhs={"op": "mul", "args": ["x", "y"]}), "actions[0].pre_q[0]"),
        (lambda d: d["actions"][0]["eff_q"][0].update(addend={"op": "div", "args": ["u1", 2]}), "actions[0].eff_q[0].addend"),
        (lambda d: d["actions"][0]["pre_q"][0].update({"or": []}), "actions[0].pre_q[0]"),
        (lambda d: d.update(init=[]), "init"),
    ],
)
def test_parse_errors_carry_path(mutate, where):
    doc = json.loads(FIXTURE.read_text())
    mutate(doc)
    with pytest.raises(ParseError) as err:
        parse_problem(doc)
    assert err.value.path == where


def test_malformed_json_reports_position():
    with pytest.raises(ParseError, match="line 1"):
        parse_problem('{"state_vars": [}')


def test_plan_round_trip(tmp_path):
    plan = [PlanStep("increase_x2", {"u": Fraction(1, 2)})]
    dump_plan(plan, tmp_path / "p.json", "c")
    assert load_plan(tmp_path / "p.json") == plan


# -- CLI -----------------------------------------------------------------------


def test_cli_dead_end(capsys):
    assert cli_main(["solve", str(FIXTURE), "--heuristic", "hadd"]) == 1
    assert "dead end at initial state" in capsys.readouterr().out


def test_cli_compile_stats(capsys):
    assert cli_main(["compile", str(FIXTURE), "--mode", "signature", "--stats"]) == 0
    assert "|A|=1 |A_Sigma|=1 |A_O|=4" in capsys.readouterr().out


def test_cli_compile_out(tmp_path):
    out = tmp_path / "opt.json"
    assert cli_main(["compile", str(FIXTURE), "--mode", "optimistic", "--out", str(out)]) == 0
    assert len(load_problem(out).actions) == 4


def test_cli_solve_then_validate(tmp_path, capsys):
    prob, plan = tmp_path / "c.json", tmp_path / "plan.json"
    assert cli_main(["gen", "counters", "--n", "4", "--out", str(prob)]) == 0
    assert cli_main(["solve", str(prob), "--seed", "3", "--plan-out", str(plan)]) == 0
    assert cli_main(["validate", str(prob), str(plan)]) == 0
    assert "plan is a solution" in capsys.readouterr().out
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"steps": [{"action": "increase_x1", "mu": {"u": 1}}]}))
    assert cli_main(["validate", str(prob), str(bad)]) == 1


def test_cli_usage_and_parse_errors(tmp_path, capsys):
    assert cli_main([]) == 2
    assert cli_main(["solve"]) == 2
    assert cli_main(["solve", str(tmp_path / "missing.json")]) == 2
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    assert cli_main(["compile", str(broken)]) == 2
    assert "error:" in capsys.readouterr().err


def test_cli_fragment_violation(tmp_path):
    doc = json.loads(FIXTURE.read_text())
    doc["actions"][0]["pre_q"][0]["op"] = "="
    path = tmp_path / "eq.json"
    path.write_text(json.dumps(doc))
    assert cli_main(["compile", str(path)]) == 2


def test_cli_gen_suite_and_bench(tmp_path, capsys):
    suite, out = tmp_path / "suite", tmp_path / "b.csv"
    assert cli_main(["gen", "counters", "--count", "3", "--out", str(suite)]) == 0
    assert len(list(suite.glob("*.json"))) == 3
    assert cli_main(["bench", str(suite), "--heuristics", "h0,hadd", "--csv-out", str(out), "--max-nodes", "5000"]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 6 and list(rows[0]) == COLUMNS
    assert "coverage hadd: 3/3" in capsys.readouterr().out
    assert cli_main(["bench", str(suite), "--heuristics", "hmax"]) == 2


# -- benchmark -------------------------------------------------------------------


def _suite(n=4):
    return [(p.name, "counters", dump_problem(p)) for p in counters_suite(n)]


def test_bench_csv_is_deterministic_apart_from_time():
    config = SearchConfig(seed=1, max_nodes=2000)
    runs = [run_benchmark(_suite(), ["h0", "hadd"], config) for _ in range(2)]
    for r in runs:
        for rec in r:
            rec.wall_time_ms = 0
    assert to_csv(runs[0]) == to_csv(runs[1])


def test_bench_parallel_matches_serial():
    config = SearchConfig(seed=1, max_nodes=2000)
    serial = run_benchmark(_suite(3), ["hadd"], config)
    parallel = run_benchmark(_suite(3), ["hadd"], config, workers=2)
    strip = lambda rs: [(r.instance, r.status, r.expansions, r.plan_length) for r in rs]
    assert strip(serial) == strip(parallel)


def test_bench_records_errors():
    records = run_benchmark([("broken", "x", "{"), *_suite(1)], ["hadd"], SearchConfig(max_nodes=500))
    assert records[0].status == "Error" and "ParseError" in records[0].error
    assert coverage(records) == {"hadd": 1}
    assert records[1].n_actions == 2 and records[1].n_sigma == 2 and records[1].n_optimistic == 4
