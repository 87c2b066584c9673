import pytest

import oracles
from aspexplain.dag import (
    DagVertex,
    DerivationError,
    ExplanationDAG,
    build_dag,
    check_acyclic,
    expected_links,
    from_json,
    link_pairs,
    restrict_reachable,
    to_dot,
    to_json,
)
from aspexplain.explanation import Derivation, Record, derivation_for, minimal_assumption_set, well_founded_derivation
from aspexplain.parser import parse_atom
from aspexplain.reasons import ASSUMPTION, SUPPORT, Reason
from aspexplain.semantics import F, T

RUN_DOT = """\
digraph explanation {
  "edge(a,b)" [label="edge(a,b)", reason="(support, r6)"];
  "arc(b,a)" [label="arc(b,a)", reason="(support, r1(a,b))"];
  "arc(a,b)" [label="not arc(a,b)", reason="(choice_rule, r1(a,b))"];
  "arc(b,a)" -> "edge(a,b)";
  "arc(a,b)" -> "edge(a,b)";
  "arc(a,b)" -> "arc(b,a)";
}
"""

RUN_JSON = (
    '{"nodes":[{"id":"edge(a,b)","truth":"true","reason":"(support, r6)","index":2},'
    '{"id":"arc(b,a)","truth":"true","reason":"(support, r1(a,b))","index":10},'
    '{"id":"arc(a,b)","truth":"false","reason":"(choice_rule, r1(a,b))","index":16}],'
    '"links":[{"source":"arc(b,a)","target":"edge(a,b)"},{"source":"arc(a,b)","target":"edge(a,b)"},'
    '{"source":"arc(a,b)","target":"arc(b,a)"}]}\n'
)


def a(text):
    return parse_atom(text)


@pytest.fixture(scope="module")
def run_dag(run_case):
    derivation = derivation_for(frozenset(), run_case.ground, run_case.answer, run_case.wf)
    return derivation, build_dag(derivation, run_case.ground, run_case.answer)


def test_query_links(run_dag, run_case):
    _, dag = run_dag
    small = restrict_reachable(dag, run_case.query)
    assert link_pairs(small) == [
        ("arc(b,a)", "edge(a,b)"),
        ("arc(a,b)", "edge(a,b)"),
        ("arc(a,b)", "arc(b,a)"),
    ]


def test_aggregate_links_to_elements(run_dag):
    _, dag = run_dag
    assert dag.successors[a("agg1(0)")] == [a("fail(a,c)"), a("fail(b,c)")]
    assert dag.by_id[a("fail(a,c)")].index == 0


def test_lack_of_support_picks_earliest_false_element(run_dag):
    _, dag = run_dag
    # reach(a,b) has one rule instance per midpoint; each contributes one link
    assert dag.by_id[a("reach(a,b)")].truth is F
    assert all(dag.by_id[t].index < dag.by_id[a("reach(a,b)")].index for t in dag.successors[a("reach(a,b)")])


def test_every_vertex_is_explained(run_dag, run_case):
    _, dag = run_dag
    assert {v.id for v in dag.vertices} == run_case.ground.base | set(run_case.ground.aggregates)


def test_dot_and_json_goldens(run_dag, run_case):
    _, dag = run_dag
    small = restrict_reachable(dag, run_case.query)
    assert to_dot(small) == RUN_DOT
    assert to_json(small) == RUN_JSON
    assert from_json(RUN_JSON) == small


def test_empty_dag_exports():
    assert to_dot(ExplanationDAG()) == "digraph explanation {}\n"
    assert to_json(ExplanationDAG()) == '{"nodes":[],"links":[]}\n'
    assert check_acyclic(ExplanationDAG()) is None


def test_dot_escapes_quotes():
    v = DagVertex(a('p("x")'), T, Reason(SUPPORT, a("r1")), 1)
    assert '"p(\\"x\\")"' in to_dot(ExplanationDAG(frozenset({v})))


def test_restrict_is_idempotent(run_dag, run_case):
    _, dag = run_dag
    once = restrict_reachable(dag, run_case.query)
    assert restrict_reachable(once, run_case.query) == once
    with pytest.raises(KeyError):
        restrict_reachable(once, a("reach(a,a)"))


def test_cycle_is_reported_along_links():
    p, q = a("p"), a("q")
    verts = frozenset({DagVertex(p, T, Reason(SUPPORT, a("r1")), 1), DagVertex(q, T, Reason(SUPPORT, a("r2")), 2)})
    assert check_acyclic(ExplanationDAG(verts, frozenset({(p, q), (q, p)}))) in ([p, q, p], [q, p, q])
    assert check_acyclic(ExplanationDAG(verts, frozenset({(p, q)}))) is None


def test_missing_target_is_an_error(run_case):
    record = Record(1, a("arc(b,a)"), T, Reason(SUPPORT, a("r1(a,b)")))
    with pytest.raises(DerivationError):
        build_dag(Derivation((record,)), run_case.ground, run_case.answer)


def test_assumptions_are_sinks():
    record = Record(1, a("p"), F, Reason(ASSUMPTION))
    assert expected_links(record, Derivation((record,)), None, frozenset()) == []


def test_blocksworld_explanation(blocks_case):
    g, answer, wf, query = blocks_case.ground, blocks_case.answer, blocks_case.wf, blocks_case.query
    assumed = minimal_assumption_set(g, answer, query, wf)
    assert assumed == frozenset()
    dag = restrict_reachable(build_dag(derivation_for(assumed, g, answer, wf), g, answer), query)
    root = dag.by_id[query]
    assert root.truth is F and str(root.reason) == '(required_to_falsify_body, r7(("putdown",constant("a")),0))'
    assert a('non_exec(("putdown",constant("a")),0)') in dag.successors[query]
    assert check_acyclic(dag) is None


# --- invariants on random programs -----------------------------------------

def test_links_match_reference_and_point_backwards():
    for _, g, answers, rng in oracles.random_instances(31, 100):
        if not g.base:
            continue
        answer = rng.choice(answers)
        wf = well_founded_derivation(g, answer)
        query = rng.choice(sorted(g.base, key=lambda x: x.key))
        derivation = derivation_for(minimal_assumption_set(g, answer, query, wf), g, answer, wf)
        dag = build_dag(derivation, g, answer)
        for record in derivation.all_records():
            got = set(dag.successors[record.subject])
            assert got == oracles.naive_links(record, derivation, g, answer)
            assert all(dag.by_id[t].index < record.index for t in got)
        assert check_acyclic(dag) is None
        small = restrict_reachable(dag, query)
        assert from_json(to_json(small)) == small
