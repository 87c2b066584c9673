"""Two-valued and three-valued semantics over ground programs."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import AbstractSet, Iterable, Iterator, Optional, Union

from .grounding import GroundAggregate, GroundChoice, GroundProgram, GroundRule, compare, expand
from .reasons import CHOICE_RULE, LACK_OF_SUPPORT, REQUIRED_TO_FALSIFY_BODY, Reason
from .syntax import Atom, Constant, Literal

Interpretation = AbstractSet[Atom]
BodyElement = Union[Literal, GroundAggregate]


class TruthValue(enum.Enum):
    TRUE = "t"
    FALSE = "f"
    UNDEFINED = "u"

    def __str__(self) -> str:
        return self.value


T, F, U = TruthValue.TRUE, TruthValue.FALSE, TruthValue.UNDEFINED


@dataclass(frozen=True)
class ThreeValued:
    lower: frozenset[Atom]
    upper: frozenset[Atom]

    def __post_init__(self) -> None:
        object.__setattr__(self, "lower", frozenset(self.lower))
        object.__setattr__(self, "upper", frozenset(self.upper))
        if not self.lower <= self.upper:
            extra = sorted(self.lower - self.upper, key=lambda a: a.key)
            raise ValueError(f"lower bound not contained in upper bound: {', '.join(map(str, extra))}")

    @property
    def undefined(self) -> frozenset[Atom]:
        return self.upper - self.lower

    def precedes(self, other: "ThreeValued") -> bool:
        """Knowledge order: ``other`` decides everything ``self`` decides, the same way."""
        return self.lower <= other.lower and other.upper <= self.upper

    __le__ = precedes

    def value(self, atom: Atom) -> TruthValue:
        if atom in self.lower:
            return T
        return U if atom in self.upper else F


# --- two-valued ------------------------------------------------------------

def aggregate_sum(agg: GroundAggregate, interp: Interpretation) -> int:
    """Sum of weights over the distinct (weight, tuple) pairs whose condition instance holds."""
    return sum(w for w, _ in {e.tuple_key for e in agg.elements if e.atom in interp})


def _holds(agg: GroundAggregate, interp: Interpretation) -> bool:
    return compare(Constant(aggregate_sum(agg, interp)), agg.op, agg.guard)


def body_elements(rule: GroundRule) -> Iterator[BodyElement]:
    for atom in rule.pos:
        yield Literal(atom)
    for atom in rule.neg:
        yield Literal(atom, True)
    yield from rule.aggregates


def body_satisfied(rule: GroundRule, interp: Interpretation) -> bool:
    return (
        all(a in interp for a in rule.pos)
        and not any(a in interp for a in rule.neg)
        and all(_holds(g, interp) for g in rule.aggregates)
    )


def satisfies(interp: Interpretation, target) -> bool:
    if isinstance(target, Atom):
        return target in interp
    if isinstance(target, Literal):
        return (target.atom in interp) != target.negated
    if isinstance(target, GroundAggregate):
        return _holds(target, interp)
    if isinstance(target, GroundChoice):
        return target.lower <= sum(1 for a in target.atoms if a in interp) <= target.upper
    if isinstance(target, GroundRule):
        return not body_satisfied(target, interp) or satisfies(interp, target.head)
    if isinstance(target, GroundProgram):
        return all(satisfies(interp, r) for r in target.rules)
    raise TypeError(f"cannot evaluate {type(target).__name__}")


def reduct(ground: GroundProgram, interp: Interpretation) -> set[GroundRule]:
    rules: set[GroundRule] = set()
    for rule in ground.rules:
        if body_satisfied(rule, interp):
            rules |= expand(rule, interp)
    return rules


def least_model(rules: Iterable[GroundRule]) -> set[Atom]:
    """Least model of the positive parts; negative literals and aggregates are ignored."""
    waiting: dict[Atom, list[GroundRule]] = {}
    missing: dict[GroundRule, int] = {}
    queue: list[Atom] = []
    for rule in rules:
        if not isinstance(rule.head, Atom):
            continue
        missing[rule] = len(rule.pos)
        if not rule.pos:
            queue.append(rule.head)
        for atom in rule.pos:
            waiting.setdefault(atom, []).append(rule)
    model: set[Atom] = set()
    while queue:
        atom = queue.pop()
        if atom in model:
            continue
        model.add(atom)
        for rule in waiting.get(atom, ()):
            missing[rule] -= 1
            if missing[rule] == 0:
                queue.append(rule.head)
    return model


def is_answer_set(ground: GroundProgram, answer: Interpretation) -> bool:
    """Model check plus minimality via the least model of the reduct.

    With stratified aggregates the truth of every negative literal and aggregate in
    a reduct rule is fixed by ``answer``, so only positive bodies matter.
    """
    answer = frozenset(answer)
    if not answer <= ground.base or not satisfies(answer, ground):
        return False
    return least_model(reduct(ground, answer)) == answer


# --- three-valued ----------------------------------------------------------

def evaluate(target, tv: ThreeValued) -> TruthValue:
    undefined = tv.undefined
    if isinstance(target, Atom):
        return tv.value(target)
    if isinstance(target, Literal):
        v = tv.value(target.atom)
        if v is U or not target.negated:
            return v
        return F if v is T else T
    if isinstance(target, GroundAggregate):
        if any(e.atom in undefined for e in target.elements):
            return U
        return T if _holds(target, tv.lower) else F
    if isinstance(target, GroundChoice):
        if any(a in undefined for a in target.atoms):
            return U
        return T if satisfies(tv.lower, target) else F
    raise TypeError(f"cannot evaluate {type(target).__name__}")


def eval_body(rule: GroundRule, tv: ThreeValued, exclude: Optional[Atom] = None) -> TruthValue:
    """Truth of ``B(rule)``; ``exclude`` drops that atom from the positive body only."""
    result = T
    for element in body_elements(rule):
        if exclude is not None and isinstance(element, Literal) and not element.negated and element.atom == exclude:
            continue
        v = evaluate(element, tv)
        if v is F:
            return F
        if v is U:
            result = U
    return result


def infer_true_by_support(tv: ThreeValued, ground: GroundProgram,
                          answer: Optional[Interpretation] = None) -> set[tuple[Atom, Atom]]:
    """Pairs (atom, rule id) for undefined atoms heading a rule with a true body.

    When ``answer`` is given only its atoms are considered. Choice heads need no
    bound condition here.
    """
    found = set()
    for atom in tv.undefined:
        if answer is not None and atom not in answer:
            continue
        for rule in ground.by_head.get(atom, ()):
            if eval_body(rule, tv) is T:
                found.add((atom, rule.id))
    return found


def infer_false(tv: ThreeValued, ground: GroundProgram) -> set[tuple[Atom, Reason]]:
    found: set[tuple[Atom, Reason]] = set()
    undefined = tv.undefined
    for atom in undefined:
        if all(eval_body(r, tv) is F for r in ground.by_head.get(atom, ())):
            found.add((atom, Reason(LACK_OF_SUPPORT)))
    for rule in ground.rules:
        if evaluate(rule.head, tv) is F:
            pending = [e for e in body_elements(rule) if evaluate(e, tv) is not T]
            if (
                len(pending) == 1
                and isinstance(pending[0], Literal)
                and not pending[0].negated
                and pending[0].atom in undefined
            ):
                found.add((pending[0].atom, Reason(REQUIRED_TO_FALSIFY_BODY, rule.id)))
        if isinstance(rule.head, GroundChoice) and rule.head.atoms:
            if sum(1 for a in rule.head.atoms if a in tv.lower) >= rule.head.upper and eval_body(rule, tv) is T:
                for atom in rule.head.atoms:
                    if atom in undefined:
                        found.add((atom, Reason(CHOICE_RULE, rule.id)))
    return found


def find_unfounded_set(tv: ThreeValued, ground: GroundProgram) -> frozenset[Atom]:
    """Greatest unfounded set among the undefined atoms."""
    undefined = tv.undefined
    founded: set[Atom] = set()
    waiting: dict[Atom, list[GroundRule]] = {}
    missing: dict[GroundRule, int] = {}
    queue: list[GroundRule] = []
    for rule in ground.rules:
        if not any(a in undefined for a in rule.head_atoms) or eval_body(rule, tv) is F:
            continue
        open_atoms = {a for a in rule.pos if a in undefined}
        missing[rule] = len(open_atoms)
        for atom in open_atoms:
            waiting.setdefault(atom, []).append(rule)
        if not open_atoms:
            queue.append(rule)
    while queue:
        rule = queue.pop()
        for atom in rule.head_atoms:
            if atom in undefined and atom not in founded:
                founded.add(atom)
                for other in waiting.get(atom, ()):
                    missing[other] -= 1
                    if missing[other] == 0:
                        queue.append(other)
    return frozenset(undefined - founded)


def is_unfounded(candidate: AbstractSet[Atom], tv: ThreeValued, ground: GroundProgram) -> bool:
    """Direct check of the unfounded-set conditions, rule by rule."""
    for rule in ground.rules:
        if not any(a in candidate for a in rule.head_atoms):
            continue
        if eval_body(rule, tv) is F or any(a in candidate for a in rule.pos):
            continue
        return False
    return True


def well_founded_model(ground: GroundProgram) -> ThreeValued:
    """Unrestricted support plus unfounded-set removal from (∅, base); exact for choice-free programs."""
    tv = ThreeValued(frozenset(), ground.base)
    while True:
        support = {a for a, rid in infer_true_by_support(tv, ground)
                   if not ground.rule_by_id[rid].is_choice}
        unfounded = find_unfounded_set(tv, ground)
        if not support and not unfounded:
            return tv
        tv = ThreeValued(tv.lower | support, tv.upper - unfounded)


# --- oracle ----------------------------------------------------------------

class OracleCapExceeded(ValueError):
    pass


def _propagate(tv: ThreeValued, ground: GroundProgram) -> Optional[ThreeValued]:
    """Close ``tv`` under inferences that every answer set extending it must respect."""
    while True:
        for rule in ground.rules:
            if isinstance(rule.head, GroundChoice) and rule.head.is_falsum and eval_body(rule, tv) is T:
                return None
        true = {a for a, rid in infer_true_by_support(tv, ground) if not ground.rule_by_id[rid].is_choice}
        false = {a for a, _ in infer_false(tv, ground)} | find_unfounded_set(tv, ground)
        if true & false:
            return None
        if not true and not false:
            return tv
        tv = ThreeValued(tv.lower | true, tv.upper - false)


def oracle_answer_sets(ground: GroundProgram, cap: int = 20) -> list[frozenset[Atom]]:
    """All answer sets, by branching on undefined atoms with sound propagation.

    Ordered by the sorted tuple of atom keys. Raises :class:`OracleCapExceeded`
    when the base is larger than ``cap``.
    """
    if len(ground.base) > cap:
        raise OracleCapExceeded(f"base has {len(ground.base)} atoms, oracle cap is {cap}")
    results: set[frozenset[Atom]] = set()

    def search(tv: Optional[ThreeValued]) -> None:
        if tv is None:
            return
        tv = _propagate(tv, ground)
        if tv is None:
            return
        if not tv.undefined:
            if is_answer_set(ground, tv.lower):
                results.add(tv.lower)
            return
        pick = min(tv.undefined, key=lambda a: a.key)
        search(ThreeValued(tv.lower | {pick}, tv.upper))
        search(ThreeValued(tv.lower, tv.upper - {pick}))

    search(ThreeValued(frozenset(), ground.base))
    return sorted(results, key=lambda s: tuple(sorted(a.key for a in s)))
