import random

import pytest

import oracles
from aspexplain.explanation import (
    Derivation,
    NoAssumptionSetError,
    Record,
    assumption_cost,
    closure,
    derivation_for,
    enumerate_assumption_sets,
    explaining_derivation,
    explaining_step,
    is_assumption_set,
    minimal_assumption_set,
    well_founded_derivation,
)
from aspexplain.grounding import instantiate
from aspexplain.parser import parse_atom, parse_program
from aspexplain.reasons import (
    ASSUMPTION,
    INITIAL_WELL_FOUNDED,
    SUPPORT,
    Reason,
    identifier_key,
)
from aspexplain.semantics import F, T, ThreeValued

RUN_TRACE = """\
explained_by(0, fail(a,c), initial_well_founded).
explained_by(0, fail(b,c), initial_well_founded).
explained_by(1, agg1(0), lack_of_support).
explained_by(2, edge(a,b), (support, r6)).
explained_by(3, edge(a,d), (support, r7)).
explained_by(4, edge(d,c), (support, r8)).
explained_by(5, sink(c), (support, r11)).
explained_by(6, source(a), (support, r9)).
explained_by(7, source(b), (support, r10)).
explained_by(8, threshold(0), (support, r12)).
explained_by(9, arc(a,d), (support, r1(a,d))).
explained_by(10, arc(b,a), (support, r1(a,b))).
explained_by(11, arc(d,c), (support, r1(d,c))).
explained_by(12, reach(a,a), (support, r2(a))).
explained_by(13, reach(b,b), (support, r2(b))).
explained_by(14, reach(a,d), (support, r3(a,d,a))).
explained_by(15, reach(b,a), (support, r3(b,a,b))).
explained_by(16, arc(a,b), (choice_rule, r1(a,b))).
explained_by(17, arc(c,d), (choice_rule, r1(d,c))).
explained_by(18, arc(d,a), (choice_rule, r1(a,d))).
explained_by(19, reach(a,c), (support, r3(a,c,d))).
explained_by(20, reach(b,d), (support, r3(b,d,a))).
explained_by(21, reach(a,b), lack_of_support).
explained_by(22, reach(b,c), (support, r3(b,c,d))).
"""


def atoms(*texts):
    return frozenset(parse_atom(t) for t in texts)


def ground(text):
    return instantiate(parse_program(text))


def test_reason_rendering():
    assert str(Reason(SUPPORT, parse_atom("r3(a,c,d)"))) == "(support, r3(a,c,d))"
    assert str(Reason(ASSUMPTION)) == "assumption"
    with pytest.raises(ValueError):
        Reason(SUPPORT)
    with pytest.raises(ValueError):
        Reason("guess")


def test_identifier_key_is_numeric():
    assert identifier_key(parse_atom("r10")) > identifier_key(parse_atom("r9"))
    assert identifier_key(parse_atom("agg2(0)")) < identifier_key(parse_atom("agg10(0)"))


def test_run_well_founded_model(run_case):
    wf = run_case.wf
    assert wf.lower == run_case.answer
    assert wf.upper - wf.lower == atoms("arc(a,b)", "arc(c,d)", "arc(d,a)", "reach(a,b)")
    assert run_case.ground.base - wf.upper == atoms("fail(a,c)", "fail(b,c)")


def test_well_founded_matches_reference():
    for _, g, answers, _ in oracles.random_instances(21, 120):
        for answer in answers:
            wf = well_founded_derivation(g, answer)
            assert (wf.lower, wf.upper) == oracles.naive_wf(g, answer)
            assert wf.lower <= answer <= wf.upper


def test_run_trace(run_case):
    derivation = derivation_for(frozenset(), run_case.ground, run_case.answer, run_case.wf)
    assert derivation.trace() == RUN_TRACE
    assert derivation.steps == 5
    assert derivation.final == ThreeValued(run_case.answer, run_case.answer)
    assert derivation.record_of(parse_atom("fail(a,c)")).reason == Reason(INITIAL_WELL_FOUNDED)
    assert derivation.index_of(parse_atom("nothing")) is None


def test_explaining_step_from_wf(run_case):
    tv = ThreeValued(frozenset(), run_case.wf.upper)
    after = explaining_step(tv, run_case.ground, run_case.answer)
    assert atoms("edge(a,b)", "source(a)", "threshold(0)") <= after.lower
    assert after.upper == tv.upper


def test_fixpoint_start_has_no_records(run_case):
    done = ThreeValued(run_case.answer, run_case.answer)
    final, derivation = explaining_derivation(done, run_case.ground, run_case.answer)
    assert final == done
    assert derivation.steps == 0
    assert [r.subject for r in derivation.records] == [parse_atom("agg1(0)")]
    assert explaining_step(done, run_case.ground, run_case.answer) == done


def test_assumptions_come_first():
    g = ground("0 {p} 1. q :- p. p :- q. r.")
    answer = atoms("r")
    wf = well_founded_derivation(g, answer)
    assert wf.upper == atoms("p", "q", "r")
    derivation = derivation_for(atoms("p"), g, answer, wf)
    assert [str(r) for r in derivation.records] == [
        "explained_by(1, p, assumption).",
        "explained_by(2, r, (support, r4)).",
        "explained_by(3, q, lack_of_support).",
    ]
    assert derivation.assumptions == atoms("p")


def test_duplicate_subject_rejected():
    rec = Record(1, parse_atom("p"), F, Reason(ASSUMPTION))
    with pytest.raises(ValueError):
        Derivation((rec,), frozenset({parse_atom("p")}))


def test_assumption_set_checks(run_case):
    g, answer, wf = run_case.ground, run_case.answer, run_case.wf
    assert is_assumption_set(frozenset(), g, answer, wf)
    assert is_assumption_set(atoms("reach(a,b)"), g, answer, wf)
    assert not is_assumption_set(atoms("edge(a,b)"), g, answer, wf)


def test_assumption_cost():
    assert assumption_cost(atoms("p", "q"), parse_atom("p")) == (1, 2)
    assert assumption_cost(frozenset(), parse_atom("p")) == (0, 0)


def test_run_needs_no_assumptions(run_case):
    g, answer, wf = run_case.ground, run_case.answer, run_case.wf
    for atom in sorted(g.base, key=lambda a: a.key):
        assert minimal_assumption_set(g, answer, atom, wf) == frozenset()


def test_positive_loop_needs_one_assumption():
    g = ground("0 {p} 1. q :- p. p :- q. r.")
    answer = atoms("r")
    wf = well_founded_derivation(g, answer)
    assert enumerate_assumption_sets(g, answer, parse_atom("r"), wf, limit=5) == [atoms("p"), atoms("q")]
    assert minimal_assumption_set(g, answer, parse_atom("p"), wf) == atoms("q")
    assert minimal_assumption_set(g, answer, parse_atom("q"), wf) == atoms("p")


def test_enumerate_rejects_bad_limit(run_case):
    with pytest.raises(ValueError):
        enumerate_assumption_sets(run_case.ground, run_case.answer, run_case.query, run_case.wf, limit=0)


def test_non_answer_set_has_no_assumption_set():
    g = ground("p :- not q. q :- not p.")
    answer = atoms("p", "q")
    wf = ThreeValued(frozenset(), g.base)
    with pytest.raises(NoAssumptionSetError):
        minimal_assumption_set(g, answer, parse_atom("p"), wf)


# --- randomised comparison with the reference implementation ---------------

def test_closure_matches_reference():
    rng = random.Random(22)
    for _, g, answers, _ in oracles.random_instances(22, 100):
        answer = answers[-1]
        wf = well_founded_derivation(g, answer)
        undecided = sorted(wf.upper - answer, key=lambda a: a.key)
        assumed = frozenset(a for a in undecided if rng.random() < 0.5)
        mine = closure(ThreeValued(frozenset(), wf.upper - assumed), g, answer)
        assert (mine.lower, mine.upper) == oracles.naive_closure(g, answer, frozenset(), wf.upper - assumed)


def test_minimal_sets_match_exhaustive_search():
    for _, g, answers, rng in oracles.random_instances(23, 100):
        if not g.base:
            continue
        answer = rng.choice(answers)
        wf = well_founded_derivation(g, answer)
        query = rng.choice(sorted(g.base, key=lambda a: a.key))
        best, optima = oracles.brute_mas_cost(g, answer, wf.upper, query)
        found = enumerate_assumption_sets(g, answer, query, wf, limit=len(optima) + 1)
        assert [assumption_cost(x, query) for x in found] == [best] * len(optima)
        assert found == sorted(optima, key=lambda s: tuple(sorted(a.key for a in s)))


def test_derivations_replay():
    """Every record is justified by the state just before its step."""
    for _, g, answers, rng in oracles.random_instances(24, 80):
        if not g.base:
            continue
        answer = rng.choice(answers)
        wf = well_founded_derivation(g, answer)
        query = rng.choice(sorted(g.base, key=lambda a: a.key))
        assumed = minimal_assumption_set(g, answer, query, wf)
        derivation = derivation_for(assumed, g, answer, wf)
        assert derivation.final == ThreeValued(answer, answer)
        assert derivation.steps <= len(g.base)
        L, U_ = frozenset(), wf.upper - assumed
        explained = set()
        for record in derivation.records:
            if record.subject in g.aggregates:
                continue
            if record.reason.tag == ASSUMPTION:
                explained.add(record.subject)
                continue
            if record.subject not in explained:
                # a new step begins at the first subject not yet justified
                sup, fal = oracles.naive_inferences(g, answer, L, U_)
                L, U_ = L | frozenset(sup), U_ - frozenset(fal)
                batch = set(sup) | set(fal)
                explained |= batch
            pending = sup if record.truth is T else fal
            assert record.subject in pending
            assert (record.reason.tag, record.reason.rule) in (
                {("support", r) for r in sup.get(record.subject, ())} | fal.get(record.subject, set()))
        assert explained | derivation.initial == g.base
