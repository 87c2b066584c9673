import pytest

from aspexplain.analysis import (
    SafetyError,
    StratificationError,
    check_safety,
    check_stratification,
    dependency_graph,
    validate_program,
)
from aspexplain.parser import parse_program
from conftest import DATA


def run_program():
    return parse_program((DATA / "run.lp").read_text())


def rule(text):
    return parse_program(text).rules[0]


def test_run_rules_are_safe():
    for r in run_program().rules:
        assert check_safety(r).ok, str(r)


def test_aggregate_variables_are_local():
    report = check_safety(run_program().rules[4])
    assert report.ok
    assert report.global_vars == ("T",)
    assert report.local_vars == ("X", "Y")


@pytest.mark.parametrize("text", ["p(X).", "p(X) :- not q(X).", "p :- q(X), X < Y.", "{p(X)} :- q."])
def test_unsafe_rules(text):
    report = check_safety(rule(text))
    assert not report.ok
    assert "X" in report.unsafe or "Y" in report.unsafe


def test_assignment_binds_variable():
    report = check_safety(rule("p(Y) :- q(X), Y = X+1."))
    assert report.ok and report.global_vars == ("Y", "X")


def test_guard_must_be_global():
    assert not check_safety(rule(":- #sum{X : q(X)} > T.")).ok


def test_blocksworld_rules_are_safe():
    prog = parse_program((DATA / "blocksworld.lp").read_text())
    assert all(check_safety(r).ok for r in prog.rules)


def test_validate_reports_unsafe_rule():
    with pytest.raises(SafetyError, match="X"):
        validate_program(parse_program("p(X) :- not q(X)."))


def test_dependency_graph_of_run():
    graph = dependency_graph(run_program())
    assert graph.has_edge("reach", "arc") and graph.has_edge("reach", "reach")
    fail_reach = [e for e in graph.edges if (e.source, e.target) == ("fail", "reach")]
    assert fail_reach == []  # reach only occurs under negation in the fail rule
    assert not any(e.aggregate for e in graph.edges)
    assert graph.vertices >= {"arc", "edge", "reach", "source", "fail", "sink", "threshold"}


def test_dependency_graph_plain_edges():
    graph = dependency_graph(parse_program("fail(X) :- reach(X), src(X). p :- #sum{1 : q} > 0."))
    (edge,) = [e for e in graph.edges if e.source == "fail" and e.target == "reach"]
    assert not edge.aggregate
    (agg_edge,) = [e for e in graph.edges if e.source == "p"]
    assert agg_edge.target == "q" and agg_edge.aggregate


def test_empty_graph():
    graph = dependency_graph(parse_program(""))
    assert not graph.vertices and not graph.edges


def test_graph_is_deterministic():
    text = (DATA / "run.lp").read_text()
    assert dependency_graph(parse_program(text)) == dependency_graph(parse_program(text))


def test_run_is_stratified():
    assert check_stratification(run_program()) is None


def test_aggregate_self_loop():
    assert check_stratification(parse_program("p :- #sum{1 : p} > 0.")) == ["p", "p"]


def test_two_edge_cycle_through_aggregate():
    prog = parse_program("p :- q. q :- #sum{1 : p} > 0.")
    assert check_stratification(prog) == ["q", "p", "q"]
    with pytest.raises(StratificationError):
        validate_program(prog)


def test_recursion_without_aggregates_is_fine():
    assert check_stratification(parse_program("p :- q. q :- p.")) is None
