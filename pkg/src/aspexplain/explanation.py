"""Well-founded derivation, explaining derivations and minimal assumption sets."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import AbstractSet, Iterable, Optional

from .grounding import GroundProgram
from .reasons import (
    ASSUMPTION,
    INITIAL_WELL_FOUNDED,
    LACK_OF_SUPPORT,
    SUPPORT,
    Reason,
    identifier_key,
)
from .semantics import (
    F,
    T,
    ThreeValued,
    TruthValue,
    U,
    evaluate,
    find_unfounded_set,
    infer_false,
    infer_true_by_support,
)
from .syntax import Atom

__all__ = [
    "Reason",
    "Record",
    "Derivation",
    "well_founded_derivation",
    "explaining_step",
    "explaining_derivation",
    "is_assumption_set",
    "minimal_assumption_set",
    "enumerate_assumption_sets",
    "assumption_cost",
    "closure",
    "derivation_for",
    "NoAssumptionSetError",
]


class NoAssumptionSetError(RuntimeError):
    """No set of assumptions lets the derivation reach the given interpretation."""


@dataclass(frozen=True)
class Record:
    index: int
    subject: Atom
    truth: TruthValue
    reason: Reason

    def __str__(self) -> str:
        return f"explained_by({self.index}, {self.subject}, {self.reason})."


@dataclass(frozen=True)
class Derivation:
    """Records of an explaining derivation plus the atoms already false before it started."""

    records: tuple[Record, ...]
    initial: frozenset[Atom] = frozenset()
    steps: int = 0
    final: Optional[ThreeValued] = None
    _by_subject: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        table = {a: Record(0, a, F, Reason(INITIAL_WELL_FOUNDED)) for a in self.initial}
        for record in self.records:
            if record.subject in table:
                raise ValueError(f"{record.subject} is explained twice")
            table[record.subject] = record
        object.__setattr__(self, "_by_subject", table)

    def record_of(self, subject: Atom) -> Optional[Record]:
        return self._by_subject.get(subject)

    def index_of(self, subject: Atom) -> Optional[int]:
        record = self._by_subject.get(subject)
        return None if record is None else record.index

    @property
    def assumptions(self) -> frozenset[Atom]:
        return frozenset(r.subject for r in self.records if r.reason.tag == ASSUMPTION)

    def all_records(self) -> list[Record]:
        """Index-0 records for the initial atoms, then the derivation records."""
        initial = [self._by_subject[a] for a in sorted(self.initial, key=lambda a: a.key)]
        return initial + list(self.records)

    def trace(self) -> str:
        return "".join(f"{r}\n" for r in self.all_records())


def _by_key(atoms: Iterable[Atom]) -> list[Atom]:
    return sorted(atoms, key=lambda a: a.key)


def well_founded_derivation(ground: GroundProgram, answer: AbstractSet[Atom]) -> ThreeValued:
    """Grow the lower bound with supported atoms of ``answer`` and drop unfounded atoms until stable."""
    tv = ThreeValued(frozenset(), ground.base)
    while True:
        supported = {a for a, _ in infer_true_by_support(tv, ground, answer)}
        unfounded = find_unfounded_set(tv, ground)
        clash = supported & unfounded
        if clash:
            raise ValueError(f"atoms both supported and unfounded: {', '.join(map(str, _by_key(clash)))}")
        if not supported and not unfounded:
            return tv
        tv = ThreeValued(tv.lower | supported, tv.upper - unfounded)


def _inferences(tv: ThreeValued, ground: GroundProgram,
                answer: AbstractSet[Atom]) -> tuple[dict[Atom, Atom], dict[Atom, Reason]]:
    support: dict[Atom, Atom] = {}
    for atom, rule_id in infer_true_by_support(tv, ground, answer):
        if atom not in support or identifier_key(rule_id) < identifier_key(support[atom]):
            support[atom] = rule_id
    falsity: dict[Atom, Reason] = {}
    for atom, reason in infer_false(tv, ground):
        if atom not in falsity or reason.sort_key < falsity[atom].sort_key:
            falsity[atom] = reason
    clash = support.keys() & falsity.keys()
    if clash:
        raise ValueError(f"atoms inferred both true and false: {', '.join(map(str, _by_key(clash)))}")
    return support, falsity


def explaining_step(tv: ThreeValued, ground: GroundProgram, answer: AbstractSet[Atom]) -> ThreeValued:
    support, falsity = _inferences(tv, ground, answer)
    return ThreeValued(tv.lower | support.keys(), tv.upper - falsity.keys())


def closure(tv: ThreeValued, ground: GroundProgram, answer: AbstractSet[Atom]) -> ThreeValued:
    """Fixpoint of :func:`explaining_step` from ``tv``, without bookkeeping."""
    while True:
        nxt = explaining_step(tv, ground, answer)
        if nxt == tv:
            return tv
        tv = nxt


def _aggregate_record(index: int, agg_id: Atom, value: TruthValue) -> Record:
    reason = Reason(SUPPORT, agg_id) if value is T else Reason(LACK_OF_SUPPORT)
    return Record(index, agg_id, value, reason)


def explaining_derivation(start: ThreeValued, ground: GroundProgram, answer: AbstractSet[Atom],
                          assumptions: Iterable[Atom] = (),
                          initial: AbstractSet[Atom] = frozenset()) -> tuple[ThreeValued, Derivation]:
    """Iterate the explaining step from ``start`` and record every decision in order.

    ``assumptions`` are recorded first with reason ``assumption``; ``initial`` atoms are
    carried by the derivation with index 0. Within a step, supported atoms come
    first, then falsified atoms, each in atom order, then aggregates that became
    decided.
    """
    records: list[Record] = []

    def add(subject: Atom, truth: TruthValue, reason: Reason) -> None:
        records.append(Record(len(records) + 1, subject, truth, reason))

    for atom in _by_key(assumptions):
        add(atom, F, Reason(ASSUMPTION))
    aggregates = sorted(ground.aggregates.values(), key=lambda g: identifier_key(g.id))
    pending = []
    for agg in aggregates:
        value = evaluate(agg, start)
        if value is U:
            pending.append(agg)
        else:
            records.append(_aggregate_record(len(records) + 1, agg.id, value))

    tv, steps = start, 0
    while True:
        support, falsity = _inferences(tv, ground, answer)
        if not support and not falsity:
            break
        steps += 1
        for atom in _by_key(support):
            add(atom, T, Reason(SUPPORT, support[atom]))
        for atom in _by_key(falsity):
            add(atom, F, falsity[atom])
        tv = ThreeValued(tv.lower | support.keys(), tv.upper - falsity.keys())
        still = []
        for agg in pending:
            value = evaluate(agg, tv)
            if value is U:
                still.append(agg)
            else:
                records.append(_aggregate_record(len(records) + 1, agg.id, value))
        pending = still
    return tv, Derivation(tuple(records), frozenset(initial), steps, tv)


def is_assumption_set(assumed: AbstractSet[Atom], ground: GroundProgram, answer: AbstractSet[Atom],
                      wf: ThreeValued) -> bool:
    """True iff the explaining derivation from (∅, wf upper bound minus ``assumed``) ends at (A, A)."""
    answer = frozenset(answer)
    if assumed & answer:
        return False
    final = closure(ThreeValued(frozenset(), wf.upper - assumed), ground, answer)
    return final.lower == answer and final.upper == answer


def assumption_cost(assumed: AbstractSet[Atom], query: Atom) -> tuple[int, int]:
    """Lexicographic cost: assuming the query atom first, then the number of assumptions."""
    return (int(query in assumed), len(assumed))


def _set_key(atoms: AbstractSet[Atom]) -> tuple:
    return tuple(sorted(a.key for a in atoms))


def enumerate_assumption_sets(ground: GroundProgram, answer: AbstractSet[Atom], query: Atom,
                              wf: ThreeValued, limit: int = 1) -> list[frozenset[Atom]]:
    """Distinct assumption sets of optimal cost, lexicographically least first, up to ``limit``.

    Breadth-first over assumption-set size. A set that fails to reconstruct the
    answer set can only be repaired by assuming atoms still undecided at its
    fixpoint, so only those are branched on, and each child fixpoint is resumed
    from its parent's.
    """
    if limit < 1:
        raise ValueError("limit must be at least 1")
    answer = frozenset(answer)
    target = ThreeValued(answer, answer)
    candidates = wf.upper - answer
    forced: frozenset[Atom] = frozenset()
    forbidden: frozenset[Atom] = frozenset()
    if query in candidates:
        if is_assumption_set(candidates - {query}, ground, answer, wf):
            forbidden = frozenset({query})
        else:
            forced = frozenset({query})

    root = closure(ThreeValued(frozenset(), wf.upper - forced), ground, answer)
    level = {forced: root}
    while level:
        solutions = [x for x, state in level.items() if state == target]
        if solutions:
            return sorted(solutions, key=_set_key)[:limit]
        following: dict[frozenset[Atom], ThreeValued] = {}
        for assumed in sorted(level, key=_set_key):
            state = level[assumed]
            for atom in _by_key(state.undefined - answer - forbidden):
                grown = assumed | {atom}
                if grown not in following:
                    following[grown] = closure(ThreeValued(state.lower, state.upper - {atom}), ground, answer)
        level = following
    raise NoAssumptionSetError("no assumption set reconstructs the answer set; is it really an answer set?")


def minimal_assumption_set(ground: GroundProgram, answer: AbstractSet[Atom], query: Atom,
                           wf: ThreeValued) -> frozenset[Atom]:
    return enumerate_assumption_sets(ground, answer, query, wf, limit=1)[0]


def derivation_for(assumed: AbstractSet[Atom], ground: GroundProgram, answer: AbstractSet[Atom],
                   wf: ThreeValued) -> Derivation:
    """Explaining derivation from (∅, wf upper bound minus ``assumed``) with its records."""
    start = ThreeValued(frozenset(), wf.upper - frozenset(assumed))
    _, derivation = explaining_derivation(start, ground, answer, assumed, ground.base - wf.upper)
    return derivation
